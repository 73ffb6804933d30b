#include "sentinel/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sentinel/errors.hpp"

namespace sentinel::numerics {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
        throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ConfigError("item() on tensor of shape " + shape_str(shape_));
    }
    return data_[0];
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void assert_finite(const Tensor& t, const std::string& what) {
    if (!t.all_finite()) {
        throw NumericError("non-finite value in " + what);
    }
}

Tensor conv1d(const Tensor& image, const Tensor& filters) {
    if (image.rank() != 3 || image.dim(0) != 1 || image.dim(2) != 1) {
        throw ConfigError("conv1d expects image of shape (1, W, 1), got " +
                          shape_str(image.shape()));
    }
    if (filters.rank() != 2) {
        throw ConfigError("conv1d expects filters of shape (K, k), got " +
                          shape_str(filters.shape()));
    }
    const std::size_t w = image.dim(1);
    const std::size_t num_filters = filters.dim(0);
    const std::size_t kernel = filters.dim(1);
    if (kernel > w) {
        throw ConfigError("conv1d kernel width " + std::to_string(kernel) +
                          " exceeds input width " + std::to_string(w));
    }
    const std::size_t out_w = w - kernel + 1;
    Tensor out({1, out_w, num_filters});
    for (std::size_t q = 0; q < out_w; ++q) {
        for (std::size_t f = 0; f < num_filters; ++f) {
            double acc = 0.0;
            for (std::size_t j = 0; j < kernel; ++j) {
                acc += image[q + j] * filters[f * kernel + j];
            }
            out[q * num_filters + f] = acc;
        }
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
    return out;
}

namespace {

constexpr double kSquashGuard = 1e-9;

// Writes squash of row [in, in+n) into out.
void squash_row(const double* in, double* out, std::size_t n) {
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += in[i] * in[i];
    const double norm = std::sqrt(sq);
    const double scale = sq / ((1.0 + sq) * (norm + kSquashGuard));
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * in[i];
}

void softmax_row(const double* in, double* out, std::size_t n) {
    double mx = in[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(in[i] - mx);
        sum += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
}

} // namespace

Tensor squash(const Tensor& s) {
    if (s.rank() != 1) {
        throw ConfigError("squash expects a rank-1 tensor, got " +
                          shape_str(s.shape()));
    }
    Tensor out(s.shape());
    squash_row(s.data(), out.data(), s.size());
    return out;
}

Tensor squash_rows(const Tensor& s) {
    if (s.rank() != 2) {
        throw ConfigError("squash_rows expects a rank-2 tensor, got " +
                          shape_str(s.shape()));
    }
    Tensor out(s.shape());
    const std::size_t rows = s.dim(0), cols = s.dim(1);
    for (std::size_t r = 0; r < rows; ++r) {
        squash_row(s.data() + r * cols, out.data() + r * cols, cols);
    }
    return out;
}

Tensor softmax(const Tensor& a) {
    if (a.rank() != 1 || a.size() == 0) {
        throw ConfigError("softmax expects a non-empty rank-1 tensor, got " +
                          shape_str(a.shape()));
    }
    assert_finite(a, "softmax input");
    Tensor out(a.shape());
    softmax_row(a.data(), out.data(), a.size());
    return out;
}

Tensor softmax_rows(const Tensor& a) {
    if (a.rank() != 2) {
        throw ConfigError("softmax_rows expects a rank-2 tensor, got " +
                          shape_str(a.shape()));
    }
    Tensor out(a.shape());
    const std::size_t rows = a.dim(0), cols = a.dim(1);
    for (std::size_t r = 0; r < rows; ++r) {
        softmax_row(a.data() + r * cols, out.data() + r * cols, cols);
    }
    return out;
}

double sparse_ce_loss(const Tensor& probs, std::size_t label) {
    if (label >= probs.size()) {
        throw ConfigError("label " + std::to_string(label) +
                          " out of range for " + std::to_string(probs.size()) +
                          " classes");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) sum += probs[i];
    if (std::abs(sum - 1.0) > 1e-9) {
        throw NumericError("sparse_ce_loss input does not sum to 1 (sum=" +
                           std::to_string(sum) + ")");
    }
    return -std::log(std::max(probs[label], 1e-12));
}

double squared_l2_norm(const Tensor& t) {
    double sq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) sq += t[i] * t[i];
    return sq;
}

} // namespace sentinel::numerics
