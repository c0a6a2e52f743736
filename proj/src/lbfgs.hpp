#pragma once

#include <deque>
#include <functional>

#include <Eigen/Dense>

namespace qbell::detail {

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Two-loop-recursion L-BFGS with Armijo backtracking. fg returns f(x) and
// fills grad.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, int max_iter = 400, double grad_tol = 1e-9) {
    const int memory = 10;
    const double c1 = 1e-4;

    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd grad(x.size());
    double f = fg(x, grad);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    LbfgsResult result;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < grad_tol) {
            result.converged = true;
            break;
        }

        // two-loop recursion
        Eigen::VectorXd q = grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[static_cast<std::size_t>(i)] =
                rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
            q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd direction = -q;
        double slope = grad.dot(direction);
        if (slope >= 0.0) {  // not a descent direction; restart from steepest
            direction = -grad;
            slope = -grad.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / grad.lpNorm<Eigen::Infinity>()) : 1.0;
        Eigen::VectorXd x_new(x.size()), grad_new(x.size());
        double f_new = f;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = x + step * direction;
            f_new = fg(x_new, grad_new);
            if (f_new <= f + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double improvement = f - f_new;
        x = std::move(x_new);
        grad = std::move(grad_new);
        f = f_new;
        if (improvement < 1e-14 * (std::abs(f) + 1.0)) {
            result.converged = true;
            break;
        }
    }

    result.x = std::move(x);
    result.f = f;
    result.iterations = iter;
    return result;
}

} // namespace qbell::detail
