#include "placement/lbfgs.hpp"

#include <cmath>
#include <cstdio>
#include <deque>

namespace placement::opt {

namespace {

struct LinePoint {
    double a, f, d; // step, value, directional derivative
};

} // namespace

Result minimize(const Objective& fn, Eigen::VectorXd x, const Options& opt) {
    const int n = static_cast<int>(x.size());
    Result res;
    Eigen::VectorXd g(n), gp(n), xp(n), dir(n);

    double f = fn(x, g);
    ++res.evaluations;

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        res.iterations = iter;
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        res.grad_norm = gnorm;
        if (opt.verbose)
            std::fprintf(stderr, "lbfgs it=%d f=%.10g |g|=%.3g\n", iter, f, gnorm);
        if (gnorm <= opt.grad_tol) {
            res.converged = true;
            break;
        }

        // Two-loop recursion.
        dir = -g;
        const int hm = static_cast<int>(s_hist.size());
        std::vector<double> alpha_buf(hm);
        for (int i = hm - 1; i >= 0; --i) {
            alpha_buf[i] = rho_hist[i] * s_hist[i].dot(dir);
            dir -= alpha_buf[i] * y_hist[i];
        }
        if (hm > 0) {
            const double yy = y_hist.back().squaredNorm();
            const double sy = s_hist.back().dot(y_hist.back());
            if (yy > 0 && sy > 0) dir *= sy / yy;
        }
        for (int i = 0; i < hm; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(dir);
            dir += (alpha_buf[i] - beta) * s_hist[i];
        }

        double d0 = g.dot(dir);
        if (!(d0 < 0)) { // not a descent direction; reset to steepest descent
            dir = -g;
            d0 = -g.squaredNorm();
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Strong Wolfe line search (bracket + zoom with bisection).
        xp = x;
        gp = g;
        const double f0 = f;
        double a_prev = 0.0, f_prev = f0, d_prev = d0;
        double a = 1.0;
        double a_lo = 0, a_hi = 0, f_lo = 0, d_lo = 0;
        bool bracketed = false, done = false;
        double f_hi = 0.0; // value at a_hi once bracketed (diagnostic only)
        for (int ls = 0; ls < opt.max_line_search; ++ls) {
            x = xp + a * dir;
            f = fn(x, g);
            ++res.evaluations;
            const double d = g.dot(dir);
            if (!bracketed) {
                if (f > f0 + opt.c1 * a * d0 || (ls > 0 && f >= f_prev)) {
                    a_lo = a_prev; f_lo = f_prev; d_lo = d_prev;
                    a_hi = a; f_hi = f;
                    bracketed = true;
                } else if (std::abs(d) <= -opt.c2 * d0) {
                    done = true;
                    break;
                } else if (d >= 0) {
                    a_lo = a; f_lo = f; d_lo = d;
                    a_hi = a_prev; f_hi = f_prev;
                    bracketed = true;
                } else {
                    a_prev = a; f_prev = f; d_prev = d;
                    a *= 2.0;
                    continue;
                }
            } else {
                if (f > f0 + opt.c1 * a * d0 || f >= f_lo) {
                    a_hi = a; f_hi = f;
                } else {
                    if (std::abs(d) <= -opt.c2 * d0) {
                        done = true;
                        break;
                    }
                    if (d * (a_hi - a_lo) >= 0) { a_hi = a_lo; f_hi = f_lo; }
                    a_lo = a; f_lo = f; d_lo = d;
                }
            }
            a = 0.5 * (a_lo + a_hi);
            if (std::abs(a_hi - a_lo) < 1e-16) break;
        }
        (void)f_hi;
        (void)d_lo;

        if (!done && f >= f0) {
            // Line search failed to improve; restore and stop.
            x = xp;
            f = f0;
            g = gp;
            res.grad_norm = g.lpNorm<Eigen::Infinity>();
            break;
        }

        Eigen::VectorXd s = x - xp;
        Eigen::VectorXd yv = g - gp;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
    }

    res.x = std::move(x);
    res.f = f;
    if (!res.converged) res.grad_norm = g.lpNorm<Eigen::Infinity>();
    res.converged = res.converged || res.grad_norm <= opt.grad_tol;
    return res;
}

} // namespace placement::opt
