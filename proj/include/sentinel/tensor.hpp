#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace sentinel::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major tensor of 64-bit floats.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Scalar extraction; requires size() == 1.
    double item() const;

    bool all_finite() const;
    void fill(double v);

private:
    Shape shape_;
    std::vector<double> data_;
};

void assert_finite(const Tensor& t, const std::string& what);

// --- forward kernels -------------------------------------------------------
// Shared by the plain functions below and by the tape primitives, so the
// recorded forward pass and the standalone operations cannot diverge.

// Valid cross-correlation of a (1, W, 1) image with (K, k) filter bank,
// producing (1, W-k+1, K). No activation.
Tensor conv1d(const Tensor& image, const Tensor& filters);

Tensor relu(const Tensor& x);

// Norm-compressing nonlinearity: s * ||s||^2 / ((1 + ||s||^2)(||s|| + 1e-9)).
// The 1e-9 guard makes the s = 0 limit exact with a finite gradient.
Tensor squash(const Tensor& s);

// Row-wise squash of a rank-2 tensor.
Tensor squash_rows(const Tensor& s);

// Numerically stable softmax of a rank-1 tensor (max subtraction).
Tensor softmax(const Tensor& a);

Tensor softmax_rows(const Tensor& a);

// -ln(max(probs[label], 1e-12)). Requires probs to sum to 1 within 1e-9.
double sparse_ce_loss(const Tensor& probs, std::size_t label);

double squared_l2_norm(const Tensor& t);

} // namespace sentinel::numerics

