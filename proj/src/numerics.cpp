#include "genfrac/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace genfrac::numerics {

namespace {

GaussRule compute_legendre(int order) {
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre_unit(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_legendre(order)).first;
    return it->second;
}

GaussRule gauss_legendre(int order, double a, double b) {
    GaussRule rule = gauss_legendre_unit(order);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

QuadratureResult integrate_panels(const std::function<double(double)>& f,
                                  double a, double b, int panels,
                                  double rel_tol, int max_depth) {
    using boost::math::quadrature::gauss_kronrod;
    QuadratureResult total;
    if (!(b > a)) return total;
    panels = std::max(panels, 1);
    const double width = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == panels) ? b : a + (i + 1) * width;
        double err = 0.0, l1 = 0.0;
        const double v = gauss_kronrod<double, 15>::integrate(f, lo, hi, max_depth, rel_tol, &err, &l1);
        total.value += v;
        total.error += err;
    }
    return total;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need at least two paired samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

LineFit fit_line_robust(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line_robust: need at least two paired samples");
    std::vector<double> slopes;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
    if (slopes.empty()) throw std::invalid_argument("fit_line_robust: degenerate abscissae");
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    LineFit fit;
    fit.slope = median(slopes);
    std::vector<double> icept(n);
    for (std::size_t i = 0; i < n; ++i) icept[i] = y[i] - fit.slope * x[i];
    fit.intercept = median(icept);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

PlaneFit fit_plane(std::span<const double> x1, std::span<const double> x2,
                   std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 3 || x1.size() != n || x2.size() != n)
        throw std::invalid_argument("fit_plane: need at least three samples");
    // Normal equations on centred data.
    double m1 = 0, m2 = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        m1 += x1[i];
        m2 += x2[i];
        my += y[i];
    }
    m1 /= n;
    m2 /= n;
    my /= n;
    double s11 = 0, s12 = 0, s22 = 0, s1y = 0, s2y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x1[i] - m1, b = x2[i] - m2, c = y[i] - my;
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        s1y += a * c;
        s2y += b * c;
    }
    const double det = s11 * s22 - s12 * s12;
    if (!(std::abs(det) > 0.0)) throw std::invalid_argument("fit_plane: collinear regressors");
    PlaneFit fit;
    fit.c1 = (s1y * s22 - s2y * s12) / det;
    fit.c2 = (s2y * s11 - s1y * s12) / det;
    fit.c0 = my - fit.c1 * m1 - fit.c2 * m2;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.c0 - fit.c1 * x1[i] - fit.c2 * x2[i];
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi >= lo) || points == 0)
        throw std::invalid_argument("log_grid: need 0 < lo <= hi and points > 0");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * i / (points - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> log_grid_per_decade(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1)
        throw std::invalid_argument("log_grid_per_decade: need 0 < lo < hi and per_decade >= 1");
    const double decades = std::log10(hi / lo);
    const auto points = static_cast<std::size_t>(std::llround(decades * per_decade)) + 1;
    return log_grid(lo, hi, std::max<std::size_t>(points, 2));
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2) return {lo};
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    g.back() = hi;
    return g;
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GENFRAC_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
        } catch (const std::exception&) {
        }
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace genfrac::numerics
