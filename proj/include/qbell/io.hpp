#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qbell/bell.hpp"
#include "qbell/concentration.hpp"
#include "qbell/sim.hpp"
#include "qbell/spdc.hpp"

namespace qbell {

// Locale-independent formatting: 12 significant digits for machine files,
// 4 decimals for paper-table diffing.
std::string fmt_sig(double x);
std::string fmt_paper(double x);

// (row_index, col_index, re, im) for every entry.
void write_operator_csv(std::ostream& out, const BellOperator& op);

// (d, violation_max_entangled, max_eigenvalue) for d = 2..d_max.
void write_table_s1_csv(std::ostream& out, int d_max, bool paper_format);

// (delta_radians, probability_closed_form, probability_numeric) over two
// fringe periods each side of zero.
void write_fringe_csv(std::ostream& out, int d, int points);

// (ell, amplitude, probability)
void write_spectrum_csv(std::ostream& out, const SpiralSpectrum& spectrum);

// (d, s, sigma, filtered, gamma, seed)
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// (a, b, v, w, count)
void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records);

// {d, gamma, diag: [...]} with ell ascending; gamma < 0 means "not derived
// from a spectrum" and is emitted as null.
std::string filter_to_json(const FilterSpec& filter, double gamma);
FilterSpec filter_from_json(std::istream& in);

// (ell, rate[, sigma]) rows, header optional.
std::vector<SpiralSample> read_spectrum_samples(std::istream& in);

} // namespace qbell
