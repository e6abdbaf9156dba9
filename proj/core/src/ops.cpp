#include "lam/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace lam {

namespace {

using detail::DataPtr;

void check_2d(const Tensor& t, const char* op) {
    if (t.ndim() != 2) {
        throw DimensionError(std::string(op) + ": expected 2-D tensor, got " + shape_str(t.shape()));
    }
}

// b may equal a's shape, or broadcast as a row vector ([n] / [1 x n]) or a
// column vector ([m x 1]) against matrix a.
enum class Spread { Same, Row, Col };

Spread classify_broadcast(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() == b.shape()) return Spread::Same;
    if (a.ndim() == 2) {
        const std::size_t m = a.shape()[0], n = a.shape()[1];
        if (b.ndim() == 1 && b.shape()[0] == n) return Spread::Row;
        if (b.ndim() == 2 && b.shape()[0] == 1 && b.shape()[1] == n) return Spread::Row;
        if (b.ndim() == 2 && b.shape()[0] == m && b.shape()[1] == 1) return Spread::Col;
    }
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

}  // namespace

namespace {

// O[m x n] += A[m x k] * B[k x n] over raw buffers. O never aliases A or B
// (outputs and gradient buffers are fresh allocations), which is what lets
// the inner loop vectorize.
void matmul_accumulate(const double* A, const double* B, double* __restrict O, std::size_t m,
                       std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* Arow = A + i * k;
        double* __restrict Orow = O + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = Arow[p];
            const double* Brow = B + p * n;
            for (std::size_t j = 0; j < n; ++j) Orow[j] += av * Brow[j];
        }
    }
}

std::vector<double> transpose_buffer(const double* X, std::size_t m, std::size_t n) {
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = X[i * n + j];
    }
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_2d(a, "matmul");
    check_2d(b, "matmul");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({m, n}, detail::propagate(a, b));
    matmul_accumulate(a.data(), b.data(), out.data_mut(), m, k, n);
    if (out.requires_grad()) {
        DataPtr da = a.storage(), db = b.storage(), dout = out.storage();
        detail::record_node(
            [da, db, dout, m, k, n]() {
                const double* dO = dout->grad.data();
                if (da->requires_grad) {
                    detail::ensure_grad(*da);
                    // dA += dO * B^T
                    const std::vector<double> bt = transpose_buffer(db->values.data(), k, n);
                    matmul_accumulate(dO, bt.data(), da->grad.data(), m, n, k);
                }
                if (db->requires_grad) {
                    detail::ensure_grad(*db);
                    // dB += A^T * dO
                    const std::vector<double> at = transpose_buffer(da->values.data(), m, k);
                    matmul_accumulate(at.data(), dO, db->grad.data(), k, m, n);
                }
            },
            {dout, da, db});
    }
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    check_2d(x, "softmax_rows");
    const std::size_t m = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros({m, n}, detail::propagate(x));
    const double* X = x.data();
    double* O = out.data_mut();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = X + i * n;
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        double* orow = O + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            orow[j] = std::exp(row[j] - mx);
            s += orow[j];
        }
        const double inv = 1.0 / s;
        for (std::size_t j = 0; j < n; ++j) orow[j] *= inv;
    }
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, m, n]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* Y = dout->values.data();
                const double* dY = dout->grad.data();
                double* gX = dx->grad.data();
                // dx_j = y_j * (dy_j - sum_k dy_k * y_k) per row
                for (std::size_t i = 0; i < m; ++i) {
                    const double* yrow = Y + i * n;
                    const double* dyrow = dY + i * n;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < n; ++j) dot += dyrow[j] * yrow[j];
                    double* gxrow = gX + i * n;
                    for (std::size_t j = 0; j < n; ++j) gxrow[j] += yrow[j] * (dyrow[j] - dot);
                }
            },
            {dout, dx});
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape(), detail::propagate(x));
    const double* X = x.data();
    double* O = out.data_mut();
    const std::size_t n = x.numel();
    for (std::size_t i = 0; i < n; ++i) O[i] = X[i] > 0.0 ? X[i] : 0.0;
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, n]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* X2 = dx->values.data();
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < n; ++i) {
                    if (X2[i] > 0.0) gX[i] += dO[i];
                }
            },
            {dout, dx});
    }
    return out;
}

namespace {

enum class EwOp { Add, Sub, Mul };

Tensor elementwise(const Tensor& a, const Tensor& b, EwOp op, const char* name) {
    const Spread spread = classify_broadcast(a, b, name);
    Tensor out = Tensor::zeros(a.shape(), detail::propagate(a, b));
    const double* A = a.data();
    const double* B = b.data();
    double* O = out.data_mut();
    const std::size_t total = a.numel();
    const std::size_t n = a.ndim() == 2 ? a.shape()[1] : total;

    auto bval = [&](std::size_t i) -> double {
        switch (spread) {
            case Spread::Same: return B[i];
            case Spread::Row: return B[i % n];
            case Spread::Col: return B[i / n];
        }
        return 0.0;
    };
    switch (op) {
        case EwOp::Add:
            for (std::size_t i = 0; i < total; ++i) O[i] = A[i] + bval(i);
            break;
        case EwOp::Sub:
            for (std::size_t i = 0; i < total; ++i) O[i] = A[i] - bval(i);
            break;
        case EwOp::Mul:
            for (std::size_t i = 0; i < total; ++i) O[i] = A[i] * bval(i);
            break;
    }
    if (out.requires_grad()) {
        DataPtr da = a.storage(), db = b.storage(), dout = out.storage();
        detail::record_node(
            [da, db, dout, op, spread, total, n]() {
                const double* dO = dout->grad.data();
                if (da->requires_grad) {
                    detail::ensure_grad(*da);
                    double* gA = da->grad.data();
                    if (op == EwOp::Mul) {
                        const double* B2 = db->values.data();
                        for (std::size_t i = 0; i < total; ++i) {
                            const double bv = spread == Spread::Same ? B2[i]
                                            : spread == Spread::Row  ? B2[i % n]
                                                                     : B2[i / n];
                            gA[i] += dO[i] * bv;
                        }
                    } else {
                        for (std::size_t i = 0; i < total; ++i) gA[i] += dO[i];
                    }
                }
                if (db->requires_grad) {
                    detail::ensure_grad(*db);
                    double* gB = db->grad.data();
                    const double* A2 = da->values.data();
                    const double sign = op == EwOp::Sub ? -1.0 : 1.0;
                    for (std::size_t i = 0; i < total; ++i) {
                        const std::size_t bi = spread == Spread::Same ? i
                                             : spread == Spread::Row  ? i % n
                                                                      : i / n;
                        gB[bi] += op == EwOp::Mul ? dO[i] * A2[i] : sign * dO[i];
                    }
                }
            },
            {dout, da, db});
    }
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, EwOp::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(a, b, EwOp::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(a, b, EwOp::Mul, "mul"); }

Tensor scale(const Tensor& x, double c) {
    Tensor out = Tensor::zeros(x.shape(), detail::propagate(x));
    const double* X = x.data();
    double* O = out.data_mut();
    const std::size_t n = x.numel();
    for (std::size_t i = 0; i < n; ++i) O[i] = X[i] * c;
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, c, n]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < n; ++i) gX[i] += dO[i] * c;
            },
            {dout, dx});
    }
    return out;
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v;
    Tensor out = Tensor::from_values({1}, {s});
    if (detail::propagate(x)) {
        out.set_requires_grad(true);
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double g = dout->grad[0];
                for (double& v : dx->grad) v += g;
            },
            {dout, dx});
    }
    return out;
}

Tensor mean(const Tensor& x) {
    const double inv = 1.0 / static_cast<double>(x.numel());
    double s = 0.0;
    for (double v : x.values()) s += v;
    Tensor out = Tensor::from_values({1}, {s * inv});
    if (detail::propagate(x)) {
        out.set_requires_grad(true);
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, inv]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double g = dout->grad[0] * inv;
                for (double& v : dx->grad) v += g;
            },
            {dout, dx});
    }
    return out;
}

Tensor transpose(const Tensor& x) {
    check_2d(x, "transpose");
    const std::size_t m = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros({n, m}, detail::propagate(x));
    const double* X = x.data();
    double* O = out.data_mut();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) O[j * m + i] = X[i * n + j];
    }
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, m, n]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) gX[i * n + j] += dO[j * m + i];
                }
            },
            {dout, dx});
    }
    return out;
}

Tensor slice_cols(const Tensor& x, std::size_t c0, std::size_t c1) {
    check_2d(x, "slice_cols");
    if (c0 >= c1 || c1 > x.cols()) {
        throw IndexError("slice_cols: range [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") invalid for " + shape_str(x.shape()));
    }
    const std::size_t m = x.rows(), n = x.cols(), w = c1 - c0;
    Tensor out = Tensor::zeros({m, w}, detail::propagate(x));
    const double* X = x.data();
    double* O = out.data_mut();
    for (std::size_t i = 0; i < m; ++i) {
        std::memcpy(O + i * w, X + i * n + c0, w * sizeof(double));
    }
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, m, n, w, c0]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < w; ++j) gX[i * n + c0 + j] += dO[i * w + j];
                }
            },
            {dout, dx});
    }
    return out;
}

Tensor slice_rows(const Tensor& x, std::size_t r0, std::size_t r1) {
    check_2d(x, "slice_rows");
    if (r0 >= r1 || r1 > x.rows()) {
        throw IndexError("slice_rows: range [" + std::to_string(r0) + "," + std::to_string(r1) +
                         ") invalid for " + shape_str(x.shape()));
    }
    const std::size_t n = x.cols(), h = r1 - r0;
    Tensor out = Tensor::zeros({h, n}, detail::propagate(x));
    std::memcpy(out.data_mut(), x.data() + r0 * n, h * n * sizeof(double));
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, n, h, r0]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data() + r0 * n;
                for (std::size_t i = 0; i < h * n; ++i) gX[i] += dO[i];
            },
            {dout, dx});
    }
    return out;
}

namespace {

Tensor concat_2d(const std::vector<Tensor>& parts, bool by_rows, const char* name) {
    if (parts.empty()) throw ContractError(std::string(name) + ": no parts");
    std::size_t fixed = 0, varying = 0;
    bool needs_grad = false;
    for (const Tensor& p : parts) {
        check_2d(p, name);
        const std::size_t f = by_rows ? p.cols() : p.rows();
        if (&p == &parts.front()) {
            fixed = f;
        } else if (f != fixed) {
            throw DimensionError(std::string(name) + ": mismatched shapes " +
                                 shape_str(parts.front().shape()) + " vs " + shape_str(p.shape()));
        }
        varying += by_rows ? p.rows() : p.cols();
        needs_grad = needs_grad || p.requires_grad();
    }
    const Shape out_shape = by_rows ? Shape{varying, fixed} : Shape{fixed, varying};
    Tensor out = Tensor::zeros(out_shape, Graph::recording() && needs_grad);
    double* O = out.data_mut();
    if (by_rows) {
        std::size_t off = 0;
        for (const Tensor& p : parts) {
            std::memcpy(O + off, p.data(), p.numel() * sizeof(double));
            off += p.numel();
        }
    } else {
        const std::size_t m = fixed;
        std::size_t col_off = 0;
        for (const Tensor& p : parts) {
            const std::size_t w = p.cols();
            for (std::size_t i = 0; i < m; ++i) {
                std::memcpy(O + i * varying + col_off, p.data() + i * w, w * sizeof(double));
            }
            col_off += w;
        }
    }
    if (out.requires_grad()) {
        std::vector<DataPtr> srcs;
        srcs.reserve(parts.size());
        std::vector<std::size_t> widths;
        for (const Tensor& p : parts) {
            srcs.push_back(p.storage());
            widths.push_back(by_rows ? p.rows() : p.cols());
        }
        DataPtr dout = out.storage();
        const std::size_t m = fixed, total = varying;
        std::vector<DataPtr> touched = srcs;
        touched.insert(touched.begin(), dout);
        detail::record_node(
            [srcs, widths, dout, by_rows, m, total]() {
                const double* dO = dout->grad.data();
                std::size_t off = 0;
                for (std::size_t s = 0; s < srcs.size(); ++s) {
                    const std::size_t w = widths[s];
                    if (srcs[s]->requires_grad) {
                        detail::ensure_grad(*srcs[s]);
                        double* g = srcs[s]->grad.data();
                        if (by_rows) {
                            const std::size_t count = w * m;
                            const double* src = dO + off * m;
                            for (std::size_t i = 0; i < count; ++i) g[i] += src[i];
                        } else {
                            for (std::size_t i = 0; i < m; ++i) {
                                const double* src = dO + i * total + off;
                                double* dst = g + i * w;
                                for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
                            }
                        }
                    }
                    off += w;
                }
            },
            std::move(touched));
    }
    return out;
}

}  // namespace

Tensor concat_rows(const std::vector<Tensor>& parts) { return concat_2d(parts, true, "concat_rows"); }
Tensor concat_rows(const Tensor& a, const Tensor& b) { return concat_rows(std::vector<Tensor>{a, b}); }
Tensor concat_cols(const std::vector<Tensor>& parts) { return concat_2d(parts, false, "concat_cols"); }
Tensor concat_cols(const Tensor& a, const Tensor& b) { return concat_cols(std::vector<Tensor>{a, b}); }

Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ContractError("stack_rows: no rows");
    const std::size_t n = rows.front().numel();
    bool needs_grad = false;
    for (const Tensor& r : rows) {
        if (r.ndim() != 1 || r.numel() != n) {
            throw DimensionError("stack_rows: expected 1-D tensors of equal length, got " +
                                 shape_str(r.shape()));
        }
        needs_grad = needs_grad || r.requires_grad();
    }
    Tensor out = Tensor::zeros({rows.size(), n}, Graph::recording() && needs_grad);
    double* O = out.data_mut();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::memcpy(O + i * n, rows[i].data(), n * sizeof(double));
    }
    if (out.requires_grad()) {
        std::vector<DataPtr> srcs;
        for (const Tensor& r : rows) srcs.push_back(r.storage());
        DataPtr dout = out.storage();
        std::vector<DataPtr> touched = srcs;
        touched.insert(touched.begin(), dout);
        detail::record_node(
            [srcs, dout, n]() {
                const double* dO = dout->grad.data();
                for (std::size_t i = 0; i < srcs.size(); ++i) {
                    if (!srcs[i]->requires_grad) continue;
                    detail::ensure_grad(*srcs[i]);
                    double* g = srcs[i]->grad.data();
                    for (std::size_t j = 0; j < n; ++j) g[j] += dO[i * n + j];
                }
            },
            std::move(touched));
    }
    return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: " + shape_str(x.shape()) + " has " +
                             std::to_string(x.numel()) + " elements, target " + shape_str(shape));
    }
    Tensor out = Tensor::zeros(std::move(shape), detail::propagate(x));
    std::memcpy(out.data_mut(), x.data(), x.numel() * sizeof(double));
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < dout->grad.size(); ++i) gX[i] += dO[i];
            },
            {dout, dx});
    }
    return out;
}

Tensor mean_rows(const Tensor& x) {
    check_2d(x, "mean_rows");
    const std::size_t m = x.rows(), n = x.cols();
    const double inv = 1.0 / static_cast<double>(m);
    Tensor out = Tensor::zeros({1, n}, detail::propagate(x));
    const double* X = x.data();
    double* O = out.data_mut();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) O[j] += X[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) O[j] *= inv;
    if (out.requires_grad()) {
        DataPtr dx = x.storage(), dout = out.storage();
        detail::record_node(
            [dx, dout, m, n, inv]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double* dO = dout->grad.data();
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) gX[i * n + j] += dO[j] * inv;
                }
            },
            {dout, dx});
    }
    return out;
}

Tensor cross_entropy_logits(const Tensor& logits, const std::vector<std::size_t>& labels) {
    check_2d(logits, "cross_entropy_logits");
    const std::size_t batch = logits.rows(), classes = logits.cols();
    if (labels.size() != batch) {
        throw DimensionError("cross_entropy_logits: " + std::to_string(labels.size()) +
                             " labels for batch of " + std::to_string(batch));
    }
    for (std::size_t lbl : labels) {
        if (lbl >= classes) {
            throw IndexError("cross_entropy_logits: label " + std::to_string(lbl) +
                             " out of range for " + std::to_string(classes) + " classes");
        }
    }
    // Log-sum-exp with max subtraction; keep the probabilities for backward.
    auto probs = std::make_shared<std::vector<double>>(batch * classes);
    const double* X = logits.data();
    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const double* row = X + i * classes;
        double mx = row[0];
        for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < classes; ++j) {
            const double e = std::exp(row[j] - mx);
            (*probs)[i * classes + j] = e;
            s += e;
        }
        const double inv = 1.0 / s;
        for (std::size_t j = 0; j < classes; ++j) (*probs)[i * classes + j] *= inv;
        loss += mx + std::log(s) - row[labels[i]];
    }
    loss /= static_cast<double>(batch);
    Tensor out = Tensor::from_values({1}, {loss});
    if (detail::propagate(logits)) {
        out.set_requires_grad(true);
        DataPtr dx = logits.storage(), dout = out.storage();
        auto lbls = std::make_shared<std::vector<std::size_t>>(labels);
        detail::record_node(
            [dx, dout, probs, lbls, batch, classes]() {
                if (!dx->requires_grad) return;
                detail::ensure_grad(*dx);
                const double g = dout->grad[0] / static_cast<double>(batch);
                double* gX = dx->grad.data();
                for (std::size_t i = 0; i < batch; ++i) {
                    for (std::size_t j = 0; j < classes; ++j) {
                        const double onehot = j == (*lbls)[i] ? 1.0 : 0.0;
                        gX[i * classes + j] += g * ((*probs)[i * classes + j] - onehot);
                    }
                }
            },
            {dout, dx});
    }
    return out;
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double epsilon) {
    check_2d(x, "layer_norm_rows");
    const std::size_t m = x.rows(), n = x.cols();
    if (gain.ndim() != 1 || gain.numel() != n || bias.ndim() != 1 || bias.numel() != n) {
        throw DimensionError("layer_norm_rows: gain/bias must be [n], x is " + shape_str(x.shape()));
    }
    const bool needs_grad = Graph::recording() &&
                            (x.requires_grad() || gain.requires_grad() || bias.requires_grad());
    Tensor out = Tensor::zeros({m, n}, needs_grad);
    auto xhat = std::make_shared<std::vector<double>>(m * n);
    auto inv_std = std::make_shared<std::vector<double>>(m);
    const double* X = x.data();
    const double* G = gain.data();
    const double* B = bias.data();
    double* O = out.data_mut();
    const double invn = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = X + i * n;
        double mu = 0.0;
        for (std::size_t j = 0; j < n; ++j) mu += row[j];
        mu *= invn;
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double c = row[j] - mu;
            var += c * c;
        }
        var *= invn;
        const double is = 1.0 / std::sqrt(var + epsilon);
        (*inv_std)[i] = is;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = (row[j] - mu) * is;
            (*xhat)[i * n + j] = h;
            O[i * n + j] = G[j] * h + B[j];
        }
    }
    if (needs_grad) {
        DataPtr dx = x.storage(), dg = gain.storage(), db = bias.storage(), dout = out.storage();
        detail::record_node(
            [dx, dg, db, dout, xhat, inv_std, m, n, invn]() {
                const double* dO = dout->grad.data();
                if (dg->requires_grad) {
                    detail::ensure_grad(*dg);
                    double* gG = dg->grad.data();
                    for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                            gG[j] += dO[i * n + j] * (*xhat)[i * n + j];
                        }
                    }
                }
                if (db->requires_grad) {
                    detail::ensure_grad(*db);
                    double* gB = db->grad.data();
                    for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t j = 0; j < n; ++j) gB[j] += dO[i * n + j];
                    }
                }
                if (dx->requires_grad) {
                    detail::ensure_grad(*dx);
                    double* gX = dx->grad.data();
                    const double* G2 = dg->values.data();
                    for (std::size_t i = 0; i < m; ++i) {
                        // dxhat = dy * gain; dx = (dxhat - mean(dxhat)
                        //        - xhat * mean(dxhat * xhat)) * inv_std
                        double mean_dh = 0.0, mean_dh_h = 0.0;
                        for (std::size_t j = 0; j < n; ++j) {
                            const double dh = dO[i * n + j] * G2[j];
                            mean_dh += dh;
                            mean_dh_h += dh * (*xhat)[i * n + j];
                        }
                        mean_dh *= invn;
                        mean_dh_h *= invn;
                        const double is = (*inv_std)[i];
                        for (std::size_t j = 0; j < n; ++j) {
                            const double dh = dO[i * n + j] * G2[j];
                            gX[i * n + j] += (dh - mean_dh - (*xhat)[i * n + j] * mean_dh_h) * is;
                        }
                    }
                }
            },
            {dout, dx, dg, db});
    }
    return out;
}

Tensor rand_uniform(Prng& prng, Shape shape, double lo, double hi) {
    if (lo >= hi) {
        throw ContractError("rand_uniform: lo " + std::to_string(lo) + " must be < hi " +
                            std::to_string(hi));
    }
    Tensor out = Tensor::zeros(std::move(shape));
    for (double& v : out.values_mut()) v = prng.uniform(lo, hi);
    return out;
}

Tensor rand_normal(Prng& prng, Shape shape, double mean, double stddev) {
    Tensor out = Tensor::zeros(std::move(shape));
    for (double& v : out.values_mut()) v = mean + stddev * prng.normal();
    return out;
}

Tensor glorot_uniform(Prng& prng, std::size_t fan_in, std::size_t fan_out, bool requires_grad) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor out = rand_uniform(prng, {fan_in, fan_out}, -limit, limit);
    out.set_requires_grad(requires_grad);
    return out;
}

}  // namespace lam
