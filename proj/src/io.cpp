#include "qbell/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace qbell {

using nlohmann::json;

std::string fmt_sig(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt_paper(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

void write_operator_csv(std::ostream& out, const BellOperator& op) {
    out << "row_index,col_index,re,im\n";
    for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < op.matrix.cols(); ++c) {
            out << r << ',' << c << ',' << fmt_sig(op.matrix(r, c).real()) << ','
                << fmt_sig(op.matrix(r, c).imag()) << '\n';
        }
    }
}

void write_table_s1_csv(std::ostream& out, int d_max, bool paper_format) {
    if (d_max < 2 || d_max > 14) {
        throw size_error("table-s1: d_max must lie in [2, 14]");
    }
    auto fmt = paper_format ? fmt_paper : fmt_sig;
    out << "d,violation_max_entangled,max_eigenvalue\n";
    for (int d = 2; d <= d_max; ++d) {
        const BellOperator op = bell_operator(d);
        ComplexVector psi = ComplexVector::Zero(d * d);
        for (int j = 0; j < d; ++j) psi(j * d + j) = 1.0 / std::sqrt(static_cast<double>(d));
        const double entangled = (psi.adjoint() * op.matrix * psi)(0).real();
        const double largest = eig_hermitian(op.matrix).eigenvalues.front();
        out << d << ',' << fmt(entangled) << ',' << fmt(largest) << '\n';
    }
}

void write_fringe_csv(std::ostream& out, int d, int points) {
    if (points < 2) {
        throw size_error("fringe: need at least 2 grid points");
    }
    const ModeMap map = mode_map(d);
    const ReferenceState phi = max_entangled_state(d);
    const double span = 2.0 * (2.0 * std::numbers::pi / d);  // two fringe periods
    out << "delta_radians,probability_closed_form,probability_numeric\n";
    for (int i = 0; i < points; ++i) {
        const double delta = -span + 2.0 * span * i / (points - 1);
        out << fmt_sig(delta) << ',' << fmt_sig(coincidence_closed_form(delta, 0.0, d)) << ','
            << fmt_sig(coincidence_numeric(map, phi, delta, 0.0)) << '\n';
    }
}

void write_spectrum_csv(std::ostream& out, const SpiralSpectrum& spectrum) {
    out << "ell,amplitude,probability\n";
    for (int i = 0; i < spectrum.spec.d; ++i) {
        const double c = spectrum.c(i);
        out << spectrum.spec.ells[static_cast<std::size_t>(i)] << ',' << fmt_sig(c) << ','
            << fmt_sig(c * c) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "d,s,sigma,filtered,gamma,seed\n";
    for (const SweepRow& row : rows) {
        out << row.d << ',' << fmt_sig(row.s) << ',' << fmt_sig(row.sigma) << ','
            << (row.filtered ? 1 : 0) << ',' << fmt_sig(row.gamma) << ',' << row.seed << '\n';
    }
}

void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records) {
    out << "a,b,v,w,count\n";
    for (const CountRecord& r : records) {
        out << r.a << ',' << r.b << ',' << r.v << ',' << r.w << ',' << r.count << '\n';
    }
}

std::string filter_to_json(const FilterSpec& filter, double gamma) {
    json j;
    j["d"] = filter.d;
    if (gamma > 0.0) {
        j["gamma"] = gamma;
    } else {
        j["gamma"] = nullptr;
    }
    j["diag"] = std::vector<double>(filter.diag.data(), filter.diag.data() + filter.diag.size());
    return j.dump(2);
}

FilterSpec filter_from_json(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw contract_error(std::string("filter JSON: ") + e.what());
    }
    FilterSpec filter;
    filter.d = j.at("d").get<int>();
    const auto diag = j.at("diag").get<std::vector<double>>();
    filter.diag = Eigen::Map<const RealVector>(diag.data(), static_cast<Eigen::Index>(diag.size()));
    filter.validate();
    return filter;
}

std::vector<SpiralSample> read_spectrum_samples(std::istream& in) {
    std::vector<SpiralSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        for (char& ch : line) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream row(line);
        SpiralSample s;
        if (!(row >> s.ell >> s.rate)) continue;  // header or malformed line
        row >> s.sigma;
        samples.push_back(s);
    }
    if (samples.empty()) {
        throw contract_error("spectrum input: no (ell, rate) rows found");
    }
    return samples;
}

} // namespace qbell
