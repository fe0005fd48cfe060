#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaevolve/core.hpp"
#include "metaevolve/rng.hpp"

namespace metaevolve {

enum class TaskId {
    circle_packing,
    heilbronn_triangle,
    min_max_ratio,
    autocorrelation,
    signal_filter,
    sphere,
    rastrigin,
    two_phase,
};

inline std::string to_string(TaskId id) {
    switch (id) {
    case TaskId::circle_packing: return "circle_packing";
    case TaskId::heilbronn_triangle: return "heilbronn_triangle";
    case TaskId::min_max_ratio: return "min_max_ratio";
    case TaskId::autocorrelation: return "autocorrelation";
    case TaskId::signal_filter: return "signal_filter";
    case TaskId::sphere: return "sphere";
    case TaskId::rastrigin: return "rastrigin";
    case TaskId::two_phase: return "two_phase";
    }
    return "sphere";
}

inline TaskId task_id_from_string(const std::string& s) {
    if (s == "circle_packing") return TaskId::circle_packing;
    if (s == "heilbronn_triangle") return TaskId::heilbronn_triangle;
    if (s == "min_max_ratio") return TaskId::min_max_ratio;
    if (s == "autocorrelation") return TaskId::autocorrelation;
    if (s == "signal_filter") return TaskId::signal_filter;
    if (s == "sphere") return TaskId::sphere;
    if (s == "rastrigin") return TaskId::rastrigin;
    if (s == "two_phase") return TaskId::two_phase;
    throw std::invalid_argument("unknown task id: " + s);
}

enum class CircleContainer { square, rect };
enum class CirclePackingMode { sum_radii, common_radius };

struct TaskParams {
    // circle_packing
    std::int64_t circles = 26;
    CircleContainer container = CircleContainer::square;
    double rect_aspect = 1.5; // container [0, aspect] x [0, 1]
    CirclePackingMode packing_mode = CirclePackingMode::sum_radii;
    double overlap_tol = 1e-9;
    // heilbronn_triangle
    std::int64_t points = 11;
    // min_max_ratio
    std::int64_t ratio_points = 16;
    std::int64_t ratio_dim = 2;
    // autocorrelation
    std::int64_t bins = 1024;
    // signal_filter
    std::uint64_t series_seed = 7;
    std::int64_t series_length = 256;
    double noise_sigma = 0.1;
    std::vector<double> score_weights{0.4, 0.2, 0.2, 0.2}; // fidelity, smoothness, lag, trend
    // synthetic landscapes
    std::int64_t dim = 4;
    double phase_gap = 0.5;
};

struct TaskSpec {
    TaskId id = TaskId::sphere;
    TaskDirection direction = TaskDirection::maximize;
    TaskParams params;
    CandidatePayload default_payload;
    std::vector<std::pair<double, double>> bounds; // per payload dimension
    std::string brief;
    std::vector<std::string> objective_keys; // artifact keys usable by strategies
    double penalty_floor = kDefaultPenaltyFloor;
};

// --- autoconvolution ----------------------------------------------------------

namespace detail {

// Direct O(B^2) autoconvolution of a step function on the 2B-1 grid.
inline std::vector<double> autoconvolution_direct(const std::vector<double>& f, double binwidth) {
    const std::size_t b = f.size();
    std::vector<double> g(2 * b - 1, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const std::size_t i_lo = k >= b ? k - b + 1 : 0;
        const std::size_t i_hi = std::min(k, b - 1);
        double acc = 0.0;
        for (std::size_t i = i_lo; i <= i_hi; ++i) acc += f[i] * f[k - i];
        g[k] = acc * binwidth;
    }
    return g;
}

// Iterative radix-2 complex FFT, in place. Sizes are padded powers of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of 2");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

inline std::vector<double> autoconvolution_fft(const std::vector<double>& f, double binwidth) {
    const std::size_t b = f.size();
    const std::size_t need = 2 * b - 1;
    std::size_t size = 1;
    while (size < need) size <<= 1;
    std::vector<std::complex<double>> a(size);
    for (std::size_t i = 0; i < b; ++i) a[i] = f[i];
    fft_radix2(a, false);
    for (auto& x : a) x *= x;
    fft_radix2(a, true);
    std::vector<double> g(need);
    for (std::size_t i = 0; i < need; ++i) g[i] = a[i].real() * binwidth;
    return g;
}

} // namespace detail

// Peak of the autoconvolution of the normalized step function given by
// non-negative bin heights over [-0.25, 0.25].
inline double autoconvolution_peak(const std::vector<double>& heights, bool use_fft) {
    const std::size_t b = heights.size();
    if (b == 0) throw std::invalid_argument("autoconvolution: empty payload");
    const double binwidth = 0.5 / static_cast<double>(b);
    double integral = 0.0;
    for (double h : heights) integral += h * binwidth;
    if (integral <= 0.0) throw std::invalid_argument("autoconvolution: cannot normalize");
    std::vector<double> f(b);
    for (std::size_t i = 0; i < b; ++i) f[i] = heights[i] / integral;
    const auto g = use_fft ? detail::autoconvolution_fft(f, binwidth)
                           : detail::autoconvolution_direct(f, binwidth);
    return *std::max_element(g.begin(), g.end());
}

// --- evaluators ---------------------------------------------------------------

inline Evaluation eval_circle_packing(const std::vector<double>& payload, const TaskParams& p,
                                      double penalty_floor) {
    const auto n = static_cast<std::size_t>(p.circles);
    const bool common = p.packing_mode == CirclePackingMode::common_radius;
    const std::size_t expect = common ? 2 * n + 1 : 3 * n;
    if (payload.size() != expect) {
        return Evaluation::invalid(penalty_floor,
                                   {{"error", std::string("expected payload length ") +
                                                  std::to_string(expect)}});
    }
    const double width = p.container == CircleContainer::square ? 1.0 : p.rect_aspect;
    const double height = 1.0;

    std::vector<double> x(n), y(n), r(n);
    if (common) {
        const double rad = payload[2 * n];
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = payload[2 * i];
            y[i] = payload[2 * i + 1];
            r[i] = rad;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = payload[3 * i];
            y[i] = payload[3 * i + 1];
            r[i] = payload[3 * i + 2];
        }
    }

    std::vector<std::string> violations;
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] < 0.0) {
            violations.push_back("circle " + std::to_string(i) + ": negative radius");
            continue;
        }
        if (x[i] - r[i] < -p.overlap_tol || x[i] + r[i] > width + p.overlap_tol ||
            y[i] - r[i] < -p.overlap_tol || y[i] + r[i] > height + p.overlap_tol) {
            violations.push_back("circle " + std::to_string(i) + ": outside container");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            const double dist = std::sqrt(dx * dx + dy * dy);
            if (dist < r[i] + r[j] - p.overlap_tol) {
                violations.push_back("overlap " + std::to_string(i) + "," + std::to_string(j));
            }
        }
    }
    if (!violations.empty()) {
        Artifacts arts;
        arts["violation_count"] = static_cast<double>(violations.size());
        for (std::size_t i = 0; i < std::min<std::size_t>(violations.size(), 5); ++i) {
            arts["violation_" + std::to_string(i)] = violations[i];
        }
        return Evaluation::invalid(penalty_floor, std::move(arts));
    }

    double score = 0.0;
    if (common) {
        score = r[0];
    } else {
        for (double ri : r) score += ri;
    }
    return Evaluation::scored(score, TaskDirection::maximize);
}

inline Evaluation eval_heilbronn_triangle(const std::vector<double>& payload, const TaskParams& p,
                                          double penalty_floor) {
    const auto n = static_cast<std::size_t>(p.points);
    if (n < 3) throw std::invalid_argument("heilbronn: need at least 3 points");
    if (payload.size() != 2 * n) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("expected 2n values")}});
    }
    for (double v : payload) {
        if (v < 0.0 || v > 1.0) {
            return Evaluation::invalid(penalty_floor,
                                       {{"error", std::string("point outside unit square")}});
        }
    }
    double min_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                // Canonical vertex order makes the score bit-exact under
                // permutation of the input points.
                std::array<std::pair<double, double>, 3> tri{
                    std::pair{payload[2 * i], payload[2 * i + 1]},
                    std::pair{payload[2 * j], payload[2 * j + 1]},
                    std::pair{payload[2 * k], payload[2 * k + 1]}};
                std::sort(tri.begin(), tri.end());
                const auto [ax, ay] = tri[0];
                const auto [bx, by] = tri[1];
                const auto [cx, cy] = tri[2];
                const double area =
                    std::abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay)) / 2.0;
                min_area = std::min(min_area, area);
            }
        }
    }
    return Evaluation::scored(min_area, TaskDirection::maximize,
                              {{"min_triangle_area", min_area}});
}

inline Evaluation eval_min_max_ratio(const std::vector<double>& payload, const TaskParams& p,
                                     double penalty_floor) {
    const auto n = static_cast<std::size_t>(p.ratio_points);
    const auto d = static_cast<std::size_t>(p.ratio_dim);
    if (payload.size() != n * d) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("expected n*d values")}});
    }
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = payload[i * d + k] - payload[j * d + k];
                acc += diff * diff;
            }
            const double dist = std::sqrt(acc);
            d_min = std::min(d_min, dist);
            d_max = std::max(d_max, dist);
        }
    }
    if (d_min <= 0.0) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("duplicate points")}});
    }
    const double ratio_sq = (d_max / d_min) * (d_max / d_min);
    return Evaluation::scored(ratio_sq, TaskDirection::minimize,
                              {{"d_min", d_min}, {"d_max", d_max}});
}

inline Evaluation eval_autocorrelation(const std::vector<double>& payload, const TaskParams& p,
                                       double penalty_floor) {
    if (payload.size() != static_cast<std::size_t>(p.bins)) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("expected B bin heights")}});
    }
    double total = 0.0;
    for (double h : payload) {
        if (h < 0.0) {
            return Evaluation::invalid(penalty_floor,
                                       {{"error", std::string("negative bin height")}});
        }
        total += h;
    }
    if (total <= 0.0) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("all-zero payload")}});
    }
    const bool use_fft = payload.size() > 64;
    const double peak = autoconvolution_peak(payload, use_fft);
    return Evaluation::scored(peak, TaskDirection::minimize, {{"peak", peak}});
}

// --- signal filtering ----------------------------------------------------------

namespace detail {

struct SyntheticSeries {
    std::vector<double> clean; // trend + seasonality
    std::vector<double> noisy;
};

inline SyntheticSeries make_series(std::uint64_t seed, std::size_t length, double noise_sigma) {
    SyntheticSeries s;
    s.clean.resize(length);
    s.noisy.resize(length);
    Rng rng = Rng::substream(seed, "signal_series");

    // Piecewise-linear trend over 4 segments with seeded knot levels.
    const std::size_t segments = 4;
    std::vector<double> knots(segments + 1);
    for (auto& k : knots) k = rng.uniform(-1.0, 1.0);
    const double period = 24.0;
    const double amp = 0.4;
    for (std::size_t t = 0; t < length; ++t) {
        const double pos = static_cast<double>(t) / static_cast<double>(length - 1) *
                           static_cast<double>(segments);
        const auto seg = std::min<std::size_t>(static_cast<std::size_t>(pos), segments - 1);
        const double frac = pos - static_cast<double>(seg);
        const double trend = knots[seg] + frac * (knots[seg + 1] - knots[seg]);
        s.clean[t] = trend + amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
        s.noisy[t] = s.clean[t] + rng.normal(0.0, noise_sigma);
    }
    return s;
}

enum class FilterFamily { moving_average, exponential, double_exponential };

// Payload: [family selector in [0,1), p1, p2, p3], params mapped per family.
inline std::vector<double> run_filter(const std::vector<double>& y,
                                      const std::vector<double>& payload) {
    const double sel = payload[0];
    const auto family = sel < 1.0 / 3.0   ? FilterFamily::moving_average
                        : sel < 2.0 / 3.0 ? FilterFamily::exponential
                                          : FilterFamily::double_exponential;
    const std::size_t n = y.size();
    std::vector<double> out(n);
    switch (family) {
    case FilterFamily::moving_average: {
        const auto window = static_cast<std::size_t>(
            1 + std::llround(std::clamp(payload[1], 0.0, 1.0) * 30.0));
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t lo = t + 1 >= window ? t + 1 - window : 0;
            double acc = 0.0;
            for (std::size_t i = lo; i <= t; ++i) acc += y[i];
            out[t] = acc / static_cast<double>(t - lo + 1);
        }
        break;
    }
    case FilterFamily::exponential: {
        const double alpha = std::clamp(payload[1], 1e-3, 1.0);
        double level = y[0];
        for (std::size_t t = 0; t < n; ++t) {
            level = alpha * y[t] + (1.0 - alpha) * level;
            out[t] = level;
        }
        break;
    }
    case FilterFamily::double_exponential: {
        const double alpha = std::clamp(payload[1], 1e-3, 1.0);
        const double beta = std::clamp(payload[2], 1e-3, 1.0);
        double level = y[0];
        double slope = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double prev_level = level;
            level = alpha * y[t] + (1.0 - alpha) * (level + slope);
            slope = beta * (level - prev_level) + (1.0 - beta) * slope;
            out[t] = level;
        }
        break;
    }
    }
    return out;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

inline double mean_abs_diff(const std::vector<double>& a) {
    if (a.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) acc += std::abs(a[i] - a[i - 1]);
    return acc / static_cast<double>(a.size() - 1);
}

} // namespace detail

inline Evaluation eval_signal_filter(const std::vector<double>& payload, const TaskParams& p,
                                     double penalty_floor) {
    if (payload.size() != 4) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("expected 4 parameters")}});
    }
    const auto series = detail::make_series(p.series_seed, static_cast<std::size_t>(p.series_length),
                                            p.noise_sigma);
    const auto filtered = detail::run_filter(series.noisy, payload);
    for (double v : filtered) {
        if (!std::isfinite(v)) {
            return Evaluation::invalid(penalty_floor,
                                       {{"error", std::string("non-finite filter output")}});
        }
    }
    const auto& g = series.clean;
    const auto& y = series.noisy;

    const double base_rmse = detail::rmse(y, g);
    const double filt_rmse = detail::rmse(filtered, g);
    const double fidelity = base_rmse > 0.0 ? std::max(0.0, 1.0 - filt_rmse / base_rmse)
                                            : (filt_rmse == 0.0 ? 1.0 : 0.0);

    const double base_tv = detail::mean_abs_diff(y);
    const double filt_tv = detail::mean_abs_diff(filtered);
    const double smoothness =
        base_tv > 0.0 ? std::max(0.0, 1.0 - filt_tv / base_tv) : (filt_tv == 0.0 ? 1.0 : 0.0);

    // Lag: cross-correlation argmax of the filter output against the clean
    // signal over non-negative shifts.
    const std::size_t lag_max = 16;
    const std::size_t n = filtered.size();
    double best_corr = -std::numeric_limits<double>::infinity();
    std::size_t best_lag = 0;
    for (std::size_t lag = 0; lag <= lag_max; ++lag) {
        double corr = 0.0;
        for (std::size_t t = lag; t < n; ++t) corr += filtered[t] * g[t - lag];
        corr /= static_cast<double>(n); // biased estimator: lag 0 wins on identical series
        if (corr > best_corr) {
            best_corr = corr;
            best_lag = lag;
        }
    }
    const double lag_score = std::max(0.0, 1.0 - static_cast<double>(best_lag) /
                                               static_cast<double>(lag_max));

    // False trend flips: slope sign of the filter output vs the clean signal
    // across stride windows.
    const std::size_t stride = 8;
    std::size_t flips = 0;
    std::size_t windows = 0;
    for (std::size_t start = 0; start + stride < n; start += stride) {
        const double dy = filtered[start + stride] - filtered[start];
        const double dg = g[start + stride] - g[start];
        ++windows;
        if (dy * dg < 0.0) ++flips;
    }
    const double flip_budget = std::max(1.0, static_cast<double>(windows) / 2.0);
    const double trend_score =
        1.0 - std::min(1.0, static_cast<double>(flips) / flip_budget);

    const auto& w = p.score_weights;
    const double combined = w[0] * fidelity + w[1] * smoothness + w[2] * lag_score +
                            w[3] * trend_score;
    Artifacts arts{{"fidelity", fidelity},
                   {"smoothness", smoothness},
                   {"lag", lag_score},
                   {"trend", trend_score}};
    return Evaluation::scored(combined, TaskDirection::maximize, std::move(arts));
}

// --- synthetic landscapes -------------------------------------------------------

inline constexpr double kTwoPhasePlateau = 1.0;
inline constexpr double kTwoPhaseModeA = 0.2;
inline constexpr double kTwoPhaseModeB = 0.8;

// Mode coordinate x1 splits two basins. Basin A is flat in the remaining
// coordinates and caps at the plateau; basin B is a bowl peaking at
// plateau + gap whose optimum requires the non-mode coordinates near 0.5.
// Crossing from the basin-A optimum needs a jump of 0.3 in x1, beyond the
// reach of refine-scale Gaussian steps.
inline double two_phase_score(const std::vector<double>& x, double gap) {
    const double x1 = x[0];
    if (x1 < 0.5) {
        return kTwoPhasePlateau - 4.0 * (x1 - kTwoPhaseModeA) * (x1 - kTwoPhaseModeA);
    }
    double rest = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) rest += (x[i] - 0.5) * (x[i] - 0.5);
    return kTwoPhasePlateau + gap - 8.0 * (x1 - kTwoPhaseModeB) * (x1 - kTwoPhaseModeB) -
           4.0 * rest;
}

inline Evaluation eval_synthetic(TaskId id, const std::vector<double>& payload,
                                 const TaskParams& p, double penalty_floor) {
    if (payload.size() != static_cast<std::size_t>(p.dim)) {
        return Evaluation::invalid(penalty_floor, {{"error", std::string("expected d values")}});
    }
    switch (id) {
    case TaskId::sphere: {
        double acc = 0.0;
        for (double v : payload) acc += v * v;
        return Evaluation::scored(-acc, TaskDirection::maximize);
    }
    case TaskId::rastrigin: {
        double acc = 10.0 * static_cast<double>(payload.size());
        for (double v : payload) {
            acc += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
        }
        return Evaluation::scored(-acc, TaskDirection::maximize);
    }
    case TaskId::two_phase: {
        const double s = two_phase_score(payload, p.phase_gap);
        Artifacts arts{{"mode", payload[0] < 0.5 ? 0.0 : 1.0}};
        return Evaluation::scored(s, TaskDirection::maximize, std::move(arts));
    }
    default:
        throw std::invalid_argument("eval_synthetic: not a synthetic task");
    }
}

// --- task construction ----------------------------------------------------------

inline TaskSpec make_task(TaskId id, TaskParams params = {}) {
    TaskSpec t;
    t.id = id;
    t.params = params;
    switch (id) {
    case TaskId::circle_packing: {
        t.direction = TaskDirection::maximize;
        const auto n = static_cast<std::size_t>(params.circles);
        const bool common = params.packing_mode == CirclePackingMode::common_radius;
        const double width =
            params.container == CircleContainer::square ? 1.0 : params.rect_aspect;
        std::vector<double> payload;
        // Grid seed: small, well-separated circles.
        const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        const double r0 = 0.9 * std::min(width, 1.0) / (2.0 * static_cast<double>(side) + 2.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double gx = (static_cast<double>(i % side) + 1.0) /
                              (static_cast<double>(side) + 1.0) * width;
            const double gy = (static_cast<double>(i / side) + 1.0) /
                              (static_cast<double>(side) + 1.0);
            payload.push_back(gx);
            payload.push_back(gy);
            if (!common) payload.push_back(r0);
        }
        if (common) payload.push_back(r0);
        t.default_payload = CandidatePayload::numeric(std::move(payload));
        for (std::size_t i = 0; i < n; ++i) {
            t.bounds.emplace_back(0.0, width);
            t.bounds.emplace_back(0.0, 1.0);
            if (!common) t.bounds.emplace_back(0.0, 0.5);
        }
        if (common) t.bounds.emplace_back(0.0, 0.5);
        t.brief = "Pack " + std::to_string(n) + " circles into the container without overlap; "
                  "maximize " + std::string(common ? "the common radius" : "the sum of radii") + ".";
        break;
    }
    case TaskId::heilbronn_triangle: {
        t.direction = TaskDirection::maximize;
        const auto n = static_cast<std::size_t>(params.points);
        if (n < 3) throw std::invalid_argument("heilbronn: need at least 3 points");
        std::vector<double> payload;
        Rng rng = Rng::substream(11, "heilbronn_default");
        for (std::size_t i = 0; i < 2 * n; ++i) payload.push_back(rng.uniform(0.05, 0.95));
        t.default_payload = CandidatePayload::numeric(std::move(payload));
        t.bounds.assign(2 * n, {0.0, 1.0});
        t.brief = "Place " + std::to_string(n) +
                  " points in the unit square maximizing the smallest triangle area.";
        break;
    }
    case TaskId::min_max_ratio: {
        t.direction = TaskDirection::minimize;
        const auto n = static_cast<std::size_t>(params.ratio_points);
        const auto d = static_cast<std::size_t>(params.ratio_dim);
        std::vector<double> payload;
        Rng rng = Rng::substream(13, "ratio_default");
        for (std::size_t i = 0; i < n * d; ++i) payload.push_back(rng.uniform(0.0, 1.0));
        t.default_payload = CandidatePayload::numeric(std::move(payload));
        t.bounds.assign(n * d, {0.0, 1.0});
        t.brief = "Place " + std::to_string(n) + " points in " + std::to_string(d) +
                  "D minimizing the squared max/min pairwise distance ratio.";
        break;
    }
    case TaskId::autocorrelation: {
        t.direction = TaskDirection::minimize;
        const auto b = static_cast<std::size_t>(params.bins);
        t.default_payload = CandidatePayload::numeric(std::vector<double>(b, 1.0));
        t.bounds.assign(b, {0.0, 10.0});
        t.brief = "Choose " + std::to_string(b) +
                  " non-negative bin heights minimizing the autoconvolution peak.";
        break;
    }
    case TaskId::signal_filter: {
        t.direction = TaskDirection::maximize;
        t.default_payload = CandidatePayload::numeric({0.5, 0.3, 0.3, 0.3});
        t.bounds = {{0.0, 0.999999}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
        t.brief = "Tune a causal filter for a noisy series balancing fidelity, smoothness, "
                  "lag and trend accuracy.";
        t.objective_keys = {"fidelity", "smoothness", "lag", "trend"};
        break;
    }
    case TaskId::sphere:
    case TaskId::rastrigin: {
        t.direction = TaskDirection::maximize;
        const auto d = static_cast<std::size_t>(params.dim);
        t.default_payload = CandidatePayload::numeric(std::vector<double>(d, 1.0));
        t.bounds.assign(d, {-5.0, 5.0});
        t.brief = std::string("Minimize the ") +
                  (id == TaskId::sphere ? "sphere" : "Rastrigin") + " objective in " +
                  std::to_string(d) + "D (reported as negated score).";
        break;
    }
    case TaskId::two_phase: {
        t.direction = TaskDirection::maximize;
        const auto d = static_cast<std::size_t>(params.dim);
        if (d < 2) throw std::invalid_argument("two_phase: dim must be >= 2");
        std::vector<double> payload(d, 0.35);
        payload[0] = 0.35;
        t.default_payload = CandidatePayload::numeric(std::move(payload));
        t.bounds.assign(d, {0.0, 1.0});
        t.brief = "Two-basin landscape: a refine-reachable plateau and a higher basin "
                  "reachable only by a large move of the mode coordinate.";
        break;
    }
    }
    return t;
}

inline Evaluation evaluate(const TaskSpec& task, const CandidatePayload& payload) {
    if (payload.kind != PayloadKind::numeric_vector) {
        return Evaluation::invalid(task.penalty_floor,
                                   {{"error", std::string("task expects numeric payload")}});
    }
    for (double v : payload.values) {
        if (!std::isfinite(v)) {
            return Evaluation::invalid(task.penalty_floor,
                                       {{"error", std::string("non-finite payload value")}});
        }
    }
    switch (task.id) {
    case TaskId::circle_packing:
        return eval_circle_packing(payload.values, task.params, task.penalty_floor);
    case TaskId::heilbronn_triangle:
        return eval_heilbronn_triangle(payload.values, task.params, task.penalty_floor);
    case TaskId::min_max_ratio:
        return eval_min_max_ratio(payload.values, task.params, task.penalty_floor);
    case TaskId::autocorrelation:
        return eval_autocorrelation(payload.values, task.params, task.penalty_floor);
    case TaskId::signal_filter:
        return eval_signal_filter(payload.values, task.params, task.penalty_floor);
    case TaskId::sphere:
    case TaskId::rastrigin:
    case TaskId::two_phase:
        return eval_synthetic(task.id, payload.values, task.params, task.penalty_floor);
    }
    throw std::invalid_argument("evaluate: unknown task");
}

} // namespace metaevolve
