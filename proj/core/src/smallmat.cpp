#include "nambugeo/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nambugeo {

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::transposed() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Mat& Mat::operator+=(const Mat& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
}

Mat& Mat::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

Mat operator*(const Mat& a, const Mat& b) {
    Mat c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

double Mat::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

double dot(const Vec& x, const Vec& y) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

Vec mat_vec(const Mat& m, const Vec& x) {
    Vec y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
    return y;
}

namespace {

// Full-pivot LU decomposition in place. Returns the permutation sign and
// fills row/col with the pivoting order; a zero pivot stops early.
struct Lu {
    Mat m;
    std::vector<std::size_t> row, col;
    int sign = 1;
    std::size_t rank = 0;
};

Lu lu_full_pivot(Mat a) {
    const std::size_t n = a.rows();
    Lu lu{std::move(a), {}, {}, 1, 0};
    lu.row.resize(n);
    lu.col.resize(n);
    std::iota(lu.row.begin(), lu.row.end(), 0);
    std::iota(lu.col.begin(), lu.col.end(), 0);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k, pc = k;
        double best = 0.0;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = k; j < n; ++j) {
                const double v = std::abs(lu.m(lu.row[i], lu.col[j]));
                if (v > best) { best = v; pr = i; pc = j; }
            }
        if (best == 0.0) return lu;
        if (pr != k) { std::swap(lu.row[pr], lu.row[k]); lu.sign = -lu.sign; }
        if (pc != k) { std::swap(lu.col[pc], lu.col[k]); lu.sign = -lu.sign; }

        const double piv = lu.m(lu.row[k], lu.col[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu.m(lu.row[i], lu.col[k]) / piv;
            lu.m(lu.row[i], lu.col[k]) = f;
            for (std::size_t j = k + 1; j < n; ++j)
                lu.m(lu.row[i], lu.col[j]) -= f * lu.m(lu.row[k], lu.col[j]);
        }
        lu.rank = k + 1;
    }
    return lu;
}

}  // namespace

double determinant(Mat m) {
    const std::size_t n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("determinant: matrix not square");
    if (n == 0) return 1.0;
    Lu lu = lu_full_pivot(std::move(m));
    if (lu.rank < n) return 0.0;
    double d = lu.sign;
    for (std::size_t k = 0; k < n; ++k) d *= lu.m(lu.row[k], lu.col[k]);
    return d;
}

Vec solve(Mat a, Vec b) {
    const std::size_t n = a.rows();
    if (n != a.cols() || n != b.size()) throw std::invalid_argument("solve: shape mismatch");
    Lu lu = lu_full_pivot(std::move(a));
    if (lu.rank < n) throw std::domain_error("solve: singular matrix");

    // forward substitution on the permuted rows
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[lu.row[i]];
        for (std::size_t j = 0; j < i; ++j) s -= lu.m(lu.row[i], lu.col[j]) * y[j];
        y[i] = s;
    }
    // back substitution
    Vec z(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lu.m(lu.row[ii], lu.col[j]) * z[j];
        z[ii] = s / lu.m(lu.row[ii], lu.col[ii]);
    }
    // undo column permutation
    Vec x(n);
    for (std::size_t j = 0; j < n; ++j) x[lu.col[j]] = z[j];
    return x;
}

Mat inverse(const Mat& a) {
    const std::size_t n = a.rows();
    Mat inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        Vec col = solve(a, std::move(e));
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

EigenResult jacobi_eigen(Mat a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("jacobi_eigen: matrix not square");
    Mat v = Mat::identity(n);

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    scale = std::max(scale, 1.0);
    const double thresh = 1e-13 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= thresh) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= thresh * 1e-3) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p), arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigenResult r;
    r.values.resize(n);
    r.vectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        r.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
    }
    return r;
}

}  // namespace nambugeo
