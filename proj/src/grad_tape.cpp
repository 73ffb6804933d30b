#include "sentinel/grad_tape.hpp"

#include <algorithm>
#include <cmath>

#include "sentinel/errors.hpp"

namespace sentinel::numerics {

using Ref = GradTape::Ref;

Ref GradTape::push(Tensor value, std::function<void(GradTape&, const Node&)> back) {
    Tensor grad = Tensor::zeros_like(value);
    nodes_.push_back(Node{std::move(value), std::move(grad), std::move(back)});
    return Ref{nodes_.size() - 1};
}

Ref GradTape::leaf(Tensor value) {
    assert_finite(value, "tape leaf");
    return push(std::move(value), nullptr);
}

Ref GradTape::reshape(Ref x, Shape shape) {
    const Tensor& in = val_of(x);
    if (shape_size(shape) != in.size()) {
        throw ConfigError("reshape from " + shape_str(in.shape()) + " to " +
                          shape_str(shape) + " changes element count");
    }
    Tensor out(std::move(shape),
               std::vector<double>(in.data(), in.data() + in.size()));
    return push(std::move(out), [x](GradTape& t, const Node& self) {
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
    });
}

Ref GradTape::relu(Ref x) {
    Tensor out = numerics::relu(val_of(x));
    return push(std::move(out), [x](GradTape& t, const Node& self) {
        const Tensor& in = t.val_of(x);
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (in[i] > 0.0) gx[i] += self.grad[i];
        }
    });
}

Ref GradTape::conv1d(Ref image, Ref filters) {
    Tensor out = numerics::conv1d(val_of(image), val_of(filters));
    return push(std::move(out), [image, filters](GradTape& t, const Node& self) {
        const Tensor& im = t.val_of(image);
        const Tensor& f = t.val_of(filters);
        Tensor& gim = t.grad_of(image);
        Tensor& gf = t.grad_of(filters);
        const std::size_t num_filters = f.dim(0), kernel = f.dim(1);
        const std::size_t out_w = self.value.dim(1);
        for (std::size_t q = 0; q < out_w; ++q) {
            for (std::size_t fi = 0; fi < num_filters; ++fi) {
                const double g = self.grad[q * num_filters + fi];
                if (g == 0.0) continue;
                for (std::size_t j = 0; j < kernel; ++j) {
                    gim[q + j] += g * f[fi * kernel + j];
                    gf[fi * kernel + j] += g * im[q + j];
                }
            }
        }
    });
}

Ref GradTape::matvec(Ref m, Ref x) {
    const Tensor& mat = val_of(m);
    const Tensor& vec = val_of(x);
    if (mat.rank() != 2 || vec.rank() != 1 || mat.dim(1) != vec.size()) {
        throw ConfigError("matvec shape mismatch: " + shape_str(mat.shape()) +
                          " x " + shape_str(vec.shape()));
    }
    const std::size_t rows = mat.dim(0), cols = mat.dim(1);
    Tensor out({rows});
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) acc += mat[i * cols + j] * vec[j];
        out[i] = acc;
    }
    return push(std::move(out), [m, x, rows, cols](GradTape& t, const Node& self) {
        const Tensor& mat = t.val_of(m);
        const Tensor& vec = t.val_of(x);
        Tensor& gm = t.grad_of(m);
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < rows; ++i) {
            const double g = self.grad[i];
            if (g == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) {
                gm[i * cols + j] += g * vec[j];
                gx[j] += g * mat[i * cols + j];
            }
        }
    });
}

Ref GradTape::add(Ref a, Ref b) {
    const Tensor& ta = val_of(a);
    const Tensor& tb = val_of(b);
    if (!ta.same_shape(tb)) {
        throw ConfigError("add shape mismatch: " + shape_str(ta.shape()) +
                          " vs " + shape_str(tb.shape()));
    }
    Tensor out(ta.shape());
    for (std::size_t i = 0; i < ta.size(); ++i) out[i] = ta[i] + tb[i];
    return push(std::move(out), [a, b](GradTape& t, const Node& self) {
        Tensor& ga = t.grad_of(a);
        Tensor& gb = t.grad_of(b);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            ga[i] += self.grad[i];
            gb[i] += self.grad[i];
        }
    });
}

Ref GradTape::scale(Ref x, double c) {
    const Tensor& in = val_of(x);
    Tensor out(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = c * in[i];
    return push(std::move(out), [x, c](GradTape& t, const Node& self) {
        Tensor& gx = t.grad_of(x);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            gx[i] += c * self.grad[i];
        }
    });
}

Ref GradTape::sum(Ref x) {
    const Tensor& in = val_of(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) acc += in[i];
    return push(Tensor::scalar(acc), [x](GradTape& t, const Node& self) {
        Tensor& gx = t.grad_of(x);
        const double g = self.grad[0];
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
}

Ref GradTape::dot(Ref a, Ref b) {
    const Tensor& ta = val_of(a);
    const Tensor& tb = val_of(b);
    if (!ta.same_shape(tb)) {
        throw ConfigError("dot shape mismatch: " + shape_str(ta.shape()) +
                          " vs " + shape_str(tb.shape()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) acc += ta[i] * tb[i];
    return push(Tensor::scalar(acc), [a, b](GradTape& t, const Node& self) {
        const Tensor& ta = t.val_of(a);
        const Tensor& tb = t.val_of(b);
        Tensor& ga = t.grad_of(a);
        Tensor& gb = t.grad_of(b);
        const double g = self.grad[0];
        for (std::size_t i = 0; i < ta.size(); ++i) {
            ga[i] += g * tb[i];
            gb[i] += g * ta[i];
        }
    });
}

Ref GradTape::norm(Ref x) {
    const Tensor& in = val_of(x);
    const double r = std::sqrt(squared_l2_norm(in));
    return push(Tensor::scalar(r), [x, r](GradTape& t, const Node& self) {
        if (r == 0.0) return; // subgradient 0 at the origin
        const Tensor& in = t.val_of(x);
        Tensor& gx = t.grad_of(x);
        const double g = self.grad[0] / r;
        for (std::size_t i = 0; i < in.size(); ++i) gx[i] += g * in[i];
    });
}

Ref GradTape::element(Ref v, std::size_t i) {
    const Tensor& in = val_of(v);
    if (i >= in.size()) {
        throw ConfigError("element index " + std::to_string(i) +
                          " out of range for size " + std::to_string(in.size()));
    }
    return push(Tensor::scalar(in[i]), [v, i](GradTape& t, const Node& self) {
        t.grad_of(v)[i] += self.grad[0];
    });
}

namespace {

constexpr double kSquashGuard = 1e-9;

// Backward of one squash row. With r = ||s|| and
// alpha(r) = r^2 / ((1 + r^2)(r + guard)), out = alpha(r) * s, so
// ds_j += g_j * alpha + (alpha'(r)/r) * (g . s) * s_j.
void squash_row_backward(const double* s, const double* g, double* ds,
                         std::size_t n) {
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += s[i] * s[i];
    const double r = std::sqrt(sq);
    const double denom = (1.0 + sq) * (r + kSquashGuard);
    const double alpha = sq / denom;
    double gs = 0.0;
    for (std::size_t i = 0; i < n; ++i) gs += g[i] * s[i];
    double radial = 0.0;
    if (r > 0.0) {
        const double ddenom = 2.0 * r * (r + kSquashGuard) + (1.0 + sq);
        const double dalpha = (2.0 * r * denom - sq * ddenom) / (denom * denom);
        radial = dalpha / r * gs;
    }
    for (std::size_t i = 0; i < n; ++i) ds[i] += alpha * g[i] + radial * s[i];
}

void softmax_row_backward(const double* y, const double* g, double* dx,
                          std::size_t n) {
    double gy = 0.0;
    for (std::size_t i = 0; i < n; ++i) gy += g[i] * y[i];
    for (std::size_t i = 0; i < n; ++i) dx[i] += y[i] * (g[i] - gy);
}

} // namespace

Ref GradTape::squash(Ref s) {
    Tensor out = numerics::squash(val_of(s));
    return push(std::move(out), [s](GradTape& t, const Node& self) {
        const Tensor& in = t.val_of(s);
        Tensor& gs = t.grad_of(s);
        squash_row_backward(in.data(), self.grad.data(), gs.data(), in.size());
    });
}

Ref GradTape::squash_rows(Ref s) {
    Tensor out = numerics::squash_rows(val_of(s));
    return push(std::move(out), [s](GradTape& t, const Node& self) {
        const Tensor& in = t.val_of(s);
        Tensor& gs = t.grad_of(s);
        const std::size_t rows = in.dim(0), cols = in.dim(1);
        for (std::size_t r = 0; r < rows; ++r) {
            squash_row_backward(in.data() + r * cols, self.grad.data() + r * cols,
                                gs.data() + r * cols, cols);
        }
    });
}

Ref GradTape::softmax(Ref x) {
    Tensor out = numerics::softmax(val_of(x));
    return push(std::move(out), [x](GradTape& t, const Node& self) {
        Tensor& gx = t.grad_of(x);
        softmax_row_backward(self.value.data(), self.grad.data(), gx.data(),
                             self.value.size());
    });
}

Ref GradTape::softmax_rows(Ref x) {
    Tensor out = numerics::softmax_rows(val_of(x));
    return push(std::move(out), [x](GradTape& t, const Node& self) {
        Tensor& gx = t.grad_of(x);
        const std::size_t rows = self.value.dim(0), cols = self.value.dim(1);
        for (std::size_t r = 0; r < rows; ++r) {
            softmax_row_backward(self.value.data() + r * cols,
                                 self.grad.data() + r * cols,
                                 gx.data() + r * cols, cols);
        }
    });
}

Ref GradTape::sparse_ce(Ref probs, std::size_t label) {
    const double loss = sparse_ce_loss(val_of(probs), label);
    return push(Tensor::scalar(loss), [probs, label](GradTape& t, const Node& self) {
        const Tensor& p = t.val_of(probs);
        if (p[label] > 1e-12) { // inside the clamp the derivative is zero
            t.grad_of(probs)[label] -= self.grad[0] / p[label];
        }
    });
}

Ref GradTape::caps_project(Ref proj, Ref features) {
    const Tensor& v = val_of(proj);
    const Tensor& x = val_of(features);
    if (v.rank() != 3 || x.rank() != 1 || v.dim(2) != x.size()) {
        throw ConfigError("caps_project shape mismatch: " + shape_str(v.shape()) +
                          " x " + shape_str(x.shape()));
    }
    const std::size_t pc = v.dim(0), pcd = v.dim(1), f = v.dim(2);
    Tensor out({pc, pcd});
    for (std::size_t i = 0; i < pc * pcd; ++i) {
        const double* row = v.data() + i * f;
        double acc = 0.0;
        for (std::size_t j = 0; j < f; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return push(std::move(out), [proj, features, f](GradTape& t, const Node& self) {
        const Tensor& v = t.val_of(proj);
        const Tensor& x = t.val_of(features);
        Tensor& gv = t.grad_of(proj);
        Tensor& gx = t.grad_of(features);
        for (std::size_t i = 0; i < self.value.size(); ++i) {
            const double g = self.grad[i];
            if (g == 0.0) continue;
            const double* row = v.data() + i * f;
            double* grow = gv.data() + i * f;
            for (std::size_t j = 0; j < f; ++j) {
                grow[j] += g * x[j];
                gx[j] += g * row[j];
            }
        }
    });
}

Ref GradTape::caps_predict(Ref transform, Ref u) {
    const Tensor& w = val_of(transform);
    const Tensor& act = val_of(u);
    if (w.rank() != 4 || act.rank() != 2 || w.dim(0) != act.dim(0) ||
        w.dim(3) != act.dim(1)) {
        throw ConfigError("caps_predict shape mismatch: " + shape_str(w.shape()) +
                          " x " + shape_str(act.shape()));
    }
    const std::size_t pc = w.dim(0), n = w.dim(1), ocd = w.dim(2), pcd = w.dim(3);
    Tensor out({pc, n, ocd});
    for (std::size_t i = 0; i < pc; ++i) {
        const double* ui = act.data() + i * pcd;
        for (std::size_t jo = 0; jo < n * ocd; ++jo) {
            const double* row = w.data() + (i * n * ocd + jo) * pcd;
            double acc = 0.0;
            for (std::size_t p = 0; p < pcd; ++p) acc += row[p] * ui[p];
            out[i * n * ocd + jo] = acc;
        }
    }
    return push(std::move(out),
                [transform, u, n, ocd, pcd](GradTape& t, const Node& self) {
        const Tensor& w = t.val_of(transform);
        const Tensor& act = t.val_of(u);
        Tensor& gw = t.grad_of(transform);
        Tensor& gu = t.grad_of(u);
        const std::size_t pc = act.dim(0);
        for (std::size_t i = 0; i < pc; ++i) {
            const double* ui = act.data() + i * pcd;
            double* gui = gu.data() + i * pcd;
            for (std::size_t jo = 0; jo < n * ocd; ++jo) {
                const double g = self.grad[i * n * ocd + jo];
                if (g == 0.0) continue;
                const std::size_t base = (i * n * ocd + jo) * pcd;
                for (std::size_t p = 0; p < pcd; ++p) {
                    gw[base + p] += g * ui[p];
                    gui[p] += g * w[base + p];
                }
            }
        }
    });
}

Ref GradTape::route_combine(Ref coupling, Ref predictions) {
    const Tensor& c = val_of(coupling);
    const Tensor& uh = val_of(predictions);
    if (c.rank() != 2 || uh.rank() != 3 || c.dim(0) != uh.dim(0) ||
        c.dim(1) != uh.dim(1)) {
        throw ConfigError("route_combine shape mismatch: " + shape_str(c.shape()) +
                          " x " + shape_str(uh.shape()));
    }
    const std::size_t pc = c.dim(0), n = c.dim(1), ocd = uh.dim(2);
    Tensor out({n, ocd});
    for (std::size_t i = 0; i < pc; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double cij = c[i * n + j];
            const double* pred = uh.data() + (i * n + j) * ocd;
            double* dst = out.data() + j * ocd;
            for (std::size_t o = 0; o < ocd; ++o) dst[o] += cij * pred[o];
        }
    }
    return push(std::move(out),
                [coupling, predictions, n, ocd](GradTape& t, const Node& self) {
        const Tensor& c = t.val_of(coupling);
        const Tensor& uh = t.val_of(predictions);
        Tensor& gc = t.grad_of(coupling);
        Tensor& guh = t.grad_of(predictions);
        const std::size_t pc = c.dim(0);
        for (std::size_t i = 0; i < pc; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double cij = c[i * n + j];
                const double* pred = uh.data() + (i * n + j) * ocd;
                double* gpred = guh.data() + (i * n + j) * ocd;
                const double* g = self.grad.data() + j * ocd;
                double acc = 0.0;
                for (std::size_t o = 0; o < ocd; ++o) {
                    acc += g[o] * pred[o];
                    gpred[o] += cij * g[o];
                }
                gc[i * n + j] += acc;
            }
        }
    });
}

Ref GradTape::route_agreement(Ref predictions, Ref v) {
    const Tensor& uh = val_of(predictions);
    const Tensor& out_caps = val_of(v);
    if (uh.rank() != 3 || out_caps.rank() != 2 || uh.dim(1) != out_caps.dim(0) ||
        uh.dim(2) != out_caps.dim(1)) {
        throw ConfigError("route_agreement shape mismatch: " +
                          shape_str(uh.shape()) + " x " +
                          shape_str(out_caps.shape()));
    }
    const std::size_t pc = uh.dim(0), n = uh.dim(1), ocd = uh.dim(2);
    Tensor out({pc, n});
    for (std::size_t i = 0; i < pc; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double* pred = uh.data() + (i * n + j) * ocd;
            const double* vj = out_caps.data() + j * ocd;
            double acc = 0.0;
            for (std::size_t o = 0; o < ocd; ++o) acc += pred[o] * vj[o];
            out[i * n + j] = acc;
        }
    }
    return push(std::move(out),
                [predictions, v, n, ocd](GradTape& t, const Node& self) {
        const Tensor& uh = t.val_of(predictions);
        const Tensor& out_caps = t.val_of(v);
        Tensor& guh = t.grad_of(predictions);
        Tensor& gv = t.grad_of(v);
        const std::size_t pc = uh.dim(0);
        for (std::size_t i = 0; i < pc; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double g = self.grad[i * n + j];
                if (g == 0.0) continue;
                const double* pred = uh.data() + (i * n + j) * ocd;
                double* gpred = guh.data() + (i * n + j) * ocd;
                const double* vj = out_caps.data() + j * ocd;
                double* gvj = gv.data() + j * ocd;
                for (std::size_t o = 0; o < ocd; ++o) {
                    gpred[o] += g * vj[o];
                    gvj[o] += g * pred[o];
                }
            }
        }
    });
}

Ref GradTape::col_sum(Ref m) {
    const Tensor& in = val_of(m);
    if (in.rank() != 2) {
        throw ConfigError("col_sum expects a rank-2 tensor, got " +
                          shape_str(in.shape()));
    }
    const std::size_t rows = in.dim(0), cols = in.dim(1);
    Tensor out({cols});
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) out[c] += in[r * cols + c];
    }
    return push(std::move(out), [m, rows, cols](GradTape& t, const Node& self) {
        Tensor& gm = t.grad_of(m);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                gm[r * cols + c] += self.grad[c];
            }
        }
    });
}

void GradTape::backward(Ref loss) {
    if (val_of(loss).size() != 1) {
        throw ConfigError("backward requires a scalar-rooted computation, root "
                          "has shape " + shape_str(val_of(loss).shape()));
    }
    for (auto& node : nodes_) node.grad.fill(0.0);
    nodes_[loss.index].grad[0] = 1.0;
    for (std::size_t i = loss.index + 1; i-- > 0;) {
        const Node& node = nodes_[i];
        if (node.back) node.back(*this, node);
    }
}

} // namespace sentinel::numerics
