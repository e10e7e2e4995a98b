#include "lineage/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace lineage::analytics {

namespace {

double tricube(double u) {
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

double bisquare(double u) {
    const double t = 1.0 - u * u;
    return t * t;
}

double median_of(std::vector<double> values) {
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // Positions i..j-1 (0-based) share rank ((i+1) + j) / 2.
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument{fmt::format("spearman: length mismatch ({} vs {})", xs.size(), ys.size())};
    }
    if (xs.size() < 3) {
        throw std::invalid_argument{"spearman: need at least 3 points"};
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    // Both rank vectors have mean (n + 1) / 2.
    const double mean = 0.5 * static_cast<double>(xs.size() + 1);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> lowess(std::span<const double> xs, std::span<const double> ys, const LowessOptions& options) {
    const std::size_t n = xs.size();
    if (ys.size() != n) {
        throw std::invalid_argument{"lowess: xs and ys differ in length"};
    }
    if (n < 5) {
        throw std::invalid_argument{"lowess: need at least 5 points"};
    }
    if (!(options.frac > 0.0 && options.frac <= 1.0)) {
        throw std::invalid_argument{"lowess: frac must be in (0, 1]"};
    }
    if (options.robust_iters < 0) {
        throw std::invalid_argument{"lowess: robust_iters must be non-negative"};
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = xs[order[i]];
        y[i] = ys[order[i]];
    }
    const double range = x.back() - x.front();
    const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(options.frac * static_cast<double>(n) + 1e-10),
                                           2, n);

    std::vector<double> robust(n, 1.0);
    std::vector<double> fitted(n, 0.0);

    for (int pass = 0; pass <= options.robust_iters; ++pass) {
        std::size_t lo = 0;
        std::size_t i = 0;
        while (i < n) {
            const double v = x[i];
            std::size_t tie_end = i;
            while (tie_end < n && x[tie_end] == v) {
                ++tie_end;
            }
            // Slide the k-point window so it holds the k nearest neighbours of v.
            while (lo + k < n && v - x[lo] > x[lo + k] - v) {
                ++lo;
            }
            const double h = std::max(v - x[lo], x[lo + k - 1] - v);

            std::size_t from = lo;
            std::size_t to = lo + k;
            if (h == 0.0) {
                from = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), v) - x.begin());
                to = tie_end;
            }

            double sw = 0.0;
            double swx = 0.0;
            double swy = 0.0;
            for (std::size_t j = from; j < to; ++j) {
                const double r = std::abs(x[j] - v);
                double w = h == 0.0 ? 1.0 : (r < h ? tricube(r / h) : 0.0);
                w *= robust[j];
                sw += w;
                swx += w * x[j];
                swy += w * y[j];
            }

            double value = 0.0;
            if (sw <= 0.0) {
                // Every neighbour was down-weighted to zero: plain mean at v.
                double sum = 0.0;
                for (std::size_t j = i; j < tie_end; ++j) {
                    sum += y[j];
                }
                value = sum / static_cast<double>(tie_end - i);
            } else {
                const double xbar = swx / sw;
                const double ybar = swy / sw;
                double sxx = 0.0;
                double sxy = 0.0;
                for (std::size_t j = from; j < to; ++j) {
                    const double r = std::abs(x[j] - v);
                    double w = h == 0.0 ? 1.0 : (r < h ? tricube(r / h) : 0.0);
                    w *= robust[j];
                    sxx += w * (x[j] - xbar) * (x[j] - xbar);
                    sxy += w * (x[j] - xbar) * (y[j] - ybar);
                }
                const double spread = std::sqrt(sxx / sw);
                value = ybar;
                if (spread > 1e-10 * range) {
                    value += (sxy / sxx) * (v - xbar);
                }
            }
            for (std::size_t j = i; j < tie_end; ++j) {
                fitted[j] = value;
            }
            i = tie_end;
        }

        if (pass == options.robust_iters) {
            break;
        }
        std::vector<double> abs_residuals(n);
        for (std::size_t j = 0; j < n; ++j) {
            abs_residuals[j] = std::abs(y[j] - fitted[j]);
        }
        const double scale = 6.0 * median_of(abs_residuals);
        if (scale == 0.0) {
            break;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double u = abs_residuals[j] / scale;
            robust[j] = u < 1.0 ? bisquare(u) : 0.0;
        }
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[order[i]] = fitted[i];
    }
    return out;
}

}  // namespace lineage::analytics
