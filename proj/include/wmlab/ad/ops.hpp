#pragma once

#include <cmath>
#include <complex>
#include <map>

#include "wmlab/ad/graph.hpp"

namespace wmlab::ad {

// ---------------------------------------------------------------------------
// elementwise

template <typename T, typename F, typename DF>
Var<T> unary_op(const Var<T>& x, F f, DF dfdx) {
  Tensor<T> out(x->val.n(), x->val.c(), x->val.h(), x->val.w());
  for (size_t i = 0; i < out.size(); ++i) out[i] = f(x->val[i]);
  return make_node<T>(std::move(out), {x}, [dfdx](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * dfdx(p->val[i], n.val[i]);
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  check(a->val.same_shape(b->val), "add: shape mismatch " + a->val.shape_str() + " vs " + b->val.shape_str());
  Tensor<T> out = a->val;
  for (size_t i = 0; i < out.size(); ++i) out[i] += b->val[i];
  return make_node<T>(std::move(out), {a, b}, [](Node<T>& n) {
    for (auto& p : n.parents)
      if (p->requires_grad) p->accum_grad(n.grad);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  check(a->val.same_shape(b->val), "sub: shape mismatch " + a->val.shape_str() + " vs " + b->val.shape_str());
  Tensor<T> out = a->val;
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b->val[i];
  return make_node<T>(std::move(out), {a, b}, [](Node<T>& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    if (a->requires_grad) a->accum_grad(n.grad);
    if (b->requires_grad) {
      auto& g = b->grad_buf();
      for (size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  check(a->val.same_shape(b->val), "mul: shape mismatch");
  Tensor<T> out = a->val;
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b->val[i];
  return make_node<T>(std::move(out), {a, b}, [](Node<T>& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    if (a->requires_grad) {
      auto& g = a->grad_buf();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * b->val[i];
    }
    if (b->requires_grad) {
      auto& g = b->grad_buf();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * a->val[i];
    }
  });
}

template <typename T>
Var<T> affine(const Var<T>& x, T scale, T shift) {
  Tensor<T> out = x->val;
  for (size_t i = 0; i < out.size(); ++i) out[i] = scale * out[i] + shift;
  return make_node<T>(std::move(out), {x}, [scale](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    for (size_t i = 0; i < g.size(); ++i) g[i] += scale * n.grad[i];
  });
}

template <typename T>
Var<T> scale(const Var<T>& x, T s) { return affine(x, s, T(0)); }

template <typename T>
Var<T> square(const Var<T>& x) {
  return unary_op(x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Var<T> abs_val(const Var<T>& x) {
  return unary_op(x, [](T v) { return std::abs(v); },
                  [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Var<T> sqrt_val(const Var<T>& x) {
  return unary_op(x, [](T v) { return std::sqrt(v); },
                  [](T, T y) { return y > T(0) ? T(1) / (T(2) * y) : T(0); });
}

template <typename T>
Var<T> reciprocal(const Var<T>& x) {
  return unary_op(x, [](T v) { return T(1) / v; }, [](T, T y) { return -y * y; });
}

// log(max(x, eps)): the clamped log used by the adversarial terms.
template <typename T>
Var<T> log_clamped(const Var<T>& x, T eps) {
  return unary_op(x, [eps](T v) { return std::log(std::max(v, eps)); },
                  [eps](T v, T) { return v > eps ? T(1) / v : T(0); });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary_op(x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
                  [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> tanh_val(const Var<T>& x) {
  return unary_op(x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope = T(0.2)) {
  return unary_op(x, [slope](T v) { return v > T(0) ? v : slope * v; },
                  [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

// ---------------------------------------------------------------------------
// reductions and broadcasts

template <typename T>
Var<T> sum_all(const Var<T>& x) {
  T s = 0;
  for (size_t i = 0; i < x->val.size(); ++i) s += x->val[i];
  return make_node<T>(Tensor<T>::scalar(s), {x}, [](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    T g = n.grad[0];
    auto& pg = p->grad_buf();
    for (size_t i = 0; i < pg.size(); ++i) pg[i] += g;
  });
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
  return scale(sum_all(x), T(1) / static_cast<T>(x->val.size()));
}

// Weighted sum of scalar terms: total = sum_i w_i * x_i.
template <typename T>
Var<T> weighted_sum(const std::vector<Var<T>>& xs, const std::vector<T>& ws) {
  check(!xs.empty() && xs.size() == ws.size(), "weighted_sum: arity mismatch");
  T s = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    check(xs[i]->val.size() == 1, "weighted_sum: non-scalar term");
    s += ws[i] * xs[i]->val[0];
  }
  std::vector<Var<T>> parents = xs;
  return make_node<T>(Tensor<T>::scalar(s), std::move(parents), [ws](Node<T>& n) {
    for (size_t i = 0; i < n.parents.size(); ++i)
      if (n.parents[i]->requires_grad) n.parents[i]->grad_buf()[0] += ws[i] * n.grad[0];
  });
}

// Per-(n,c) plane maximum -> (N,C,1,1). Gradient routes to the first argmax.
template <typename T>
Var<T> max_per_plane(const Var<T>& x) {
  const auto& v = x->val;
  Tensor<T> out(v.n(), v.c(), 1, 1);
  std::vector<size_t> arg(static_cast<size_t>(v.n()) * v.c());
  const size_t plane = static_cast<size_t>(v.h()) * v.w();
  for (int n = 0; n < v.n(); ++n)
    for (int c = 0; c < v.c(); ++c) {
      const T* p = v.plane(n, c);
      size_t best = 0;
      for (size_t i = 1; i < plane; ++i)
        if (p[i] > p[best]) best = i;
      out.at(n, c, 0, 0) = p[best];
      arg[static_cast<size_t>(n) * v.c() + c] = best;
    }
  return make_node<T>(std::move(out), {x}, [arg, plane](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    const auto& v = p->val;
    for (int nn = 0; nn < v.n(); ++nn)
      for (int c = 0; c < v.c(); ++c) {
        size_t off = g.idx(nn, c, 0, 0);
        g[off + arg[static_cast<size_t>(nn) * v.c() + c]] += n.grad.at(nn, c, 0, 0);
      }
  });
}

// x (N,C,H,W) * s (N,C,1,1), broadcast over the plane.
template <typename T>
Var<T> mul_per_plane(const Var<T>& x, const Var<T>& s) {
  const auto& v = x->val;
  check(s->val.n() == v.n() && s->val.c() == v.c() && s->val.h() == 1 && s->val.w() == 1,
        "mul_per_plane: scale must be (N,C,1,1)");
  Tensor<T> out = v;
  const size_t plane = static_cast<size_t>(v.h()) * v.w();
  for (int n = 0; n < v.n(); ++n)
    for (int c = 0; c < v.c(); ++c) {
      T sc = s->val.at(n, c, 0, 0);
      T* p = out.plane(n, c);
      for (size_t i = 0; i < plane; ++i) p[i] *= sc;
    }
  return make_node<T>(std::move(out), {x, s}, [plane](Node<T>& n) {
    auto& x = n.parents[0];
    auto& s = n.parents[1];
    const auto& v = x->val;
    if (x->requires_grad) {
      auto& g = x->grad_buf();
      for (int nn = 0; nn < v.n(); ++nn)
        for (int c = 0; c < v.c(); ++c) {
          T sc = s->val.at(nn, c, 0, 0);
          T* gp = g.plane(nn, c);
          const T* ng = n.grad.plane(nn, c);
          for (size_t i = 0; i < plane; ++i) gp[i] += ng[i] * sc;
        }
    }
    if (s->requires_grad) {
      auto& g = s->grad_buf();
      for (int nn = 0; nn < v.n(); ++nn)
        for (int c = 0; c < v.c(); ++c) {
          const T* xp = v.plane(nn, c);
          const T* ng = n.grad.plane(nn, c);
          T acc = 0;
          for (size_t i = 0; i < plane; ++i) acc += ng[i] * xp[i];
          g.at(nn, c, 0, 0) += acc;
        }
    }
  });
}

// ---------------------------------------------------------------------------
// structure

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
  const auto& va = a->val;
  const auto& vb = b->val;
  check(va.n() == vb.n() && va.h() == vb.h() && va.w() == vb.w(), "concat: spatial/batch mismatch");
  Tensor<T> out(va.n(), va.c() + vb.c(), va.h(), va.w());
  const size_t plane = static_cast<size_t>(va.h()) * va.w();
  for (int n = 0; n < va.n(); ++n) {
    for (int c = 0; c < va.c(); ++c)
      std::copy(va.plane(n, c), va.plane(n, c) + plane, out.plane(n, c));
    for (int c = 0; c < vb.c(); ++c)
      std::copy(vb.plane(n, c), vb.plane(n, c) + plane, out.plane(n, va.c() + c));
  }
  return make_node<T>(std::move(out), {a, b}, [plane](Node<T>& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    int ca = a->val.c();
    if (a->requires_grad) {
      auto& g = a->grad_buf();
      for (int nn = 0; nn < a->val.n(); ++nn)
        for (int c = 0; c < ca; ++c) {
          const T* src = n.grad.plane(nn, c);
          T* dst = g.plane(nn, c);
          for (size_t i = 0; i < plane; ++i) dst[i] += src[i];
        }
    }
    if (b->requires_grad) {
      auto& g = b->grad_buf();
      for (int nn = 0; nn < b->val.n(); ++nn)
        for (int c = 0; c < b->val.c(); ++c) {
          const T* src = n.grad.plane(nn, ca + c);
          T* dst = g.plane(nn, c);
          for (size_t i = 0; i < plane; ++i) dst[i] += src[i];
        }
    }
  });
}

template <typename T>
Var<T> upsample_nearest2(const Var<T>& x) {
  const auto& v = x->val;
  Tensor<T> out(v.n(), v.c(), v.h() * 2, v.w() * 2);
  for (int n = 0; n < v.n(); ++n)
    for (int c = 0; c < v.c(); ++c) {
      const T* src = v.plane(n, c);
      T* dst = out.plane(n, c);
      for (int y = 0; y < out.h(); ++y)
        for (int x2 = 0; x2 < out.w(); ++x2)
          dst[y * out.w() + x2] = src[(y / 2) * v.w() + (x2 / 2)];
    }
  return make_node<T>(std::move(out), {x}, [](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    const auto& v = p->val;
    for (int nn = 0; nn < v.n(); ++nn)
      for (int c = 0; c < v.c(); ++c) {
        T* dst = g.plane(nn, c);
        const T* src = n.grad.plane(nn, c);
        int W2 = v.w() * 2;
        for (int y = 0; y < v.h() * 2; ++y)
          for (int x2 = 0; x2 < W2; ++x2) dst[(y / 2) * v.w() + (x2 / 2)] += src[y * W2 + x2];
      }
  });
}

template <typename T>
Var<T> avgpool2(const Var<T>& x) {
  const auto& v = x->val;
  check(v.h() % 2 == 0 && v.w() % 2 == 0, "avgpool2: odd spatial size");
  Tensor<T> out(v.n(), v.c(), v.h() / 2, v.w() / 2);
  for (int n = 0; n < v.n(); ++n)
    for (int c = 0; c < v.c(); ++c) {
      const T* src = v.plane(n, c);
      T* dst = out.plane(n, c);
      for (int y = 0; y < out.h(); ++y)
        for (int x2 = 0; x2 < out.w(); ++x2)
          dst[y * out.w() + x2] =
              (src[(2 * y) * v.w() + 2 * x2] + src[(2 * y) * v.w() + 2 * x2 + 1] +
               src[(2 * y + 1) * v.w() + 2 * x2] + src[(2 * y + 1) * v.w() + 2 * x2 + 1]) /
              T(4);
    }
  return make_node<T>(std::move(out), {x}, [](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    const auto& v = p->val;
    for (int nn = 0; nn < v.n(); ++nn)
      for (int c = 0; c < v.c(); ++c) {
        T* dst = g.plane(nn, c);
        const T* src = n.grad.plane(nn, c);
        int Wo = v.w() / 2;
        for (int y = 0; y < v.h() / 2; ++y)
          for (int x2 = 0; x2 < Wo; ++x2) {
            T q = src[y * Wo + x2] / T(4);
            dst[(2 * y) * v.w() + 2 * x2] += q;
            dst[(2 * y) * v.w() + 2 * x2 + 1] += q;
            dst[(2 * y + 1) * v.w() + 2 * x2] += q;
            dst[(2 * y + 1) * v.w() + 2 * x2 + 1] += q;
          }
      }
  });
}

// ---------------------------------------------------------------------------
// convolution (im2col + GEMM)

namespace detail {

// col is (Ho*Wo, Ci*kh*kw); x_plane points at sample n of x.
template <typename T>
void im2col(const Tensor<T>& x, int n, int k, int stride, int pad, MatrixRM<T>& col) {
  const int H = x.h(), W = x.w(), C = x.c();
  const int Ho = (H + 2 * pad - k) / stride + 1;
  const int Wo = (W + 2 * pad - k) / stride + 1;
  col.resize(static_cast<Eigen::Index>(Ho) * Wo, static_cast<Eigen::Index>(C) * k * k);
  for (int oy = 0; oy < Ho; ++oy) {
    for (int ox = 0; ox < Wo; ++ox) {
      T* row = col.data() + (static_cast<size_t>(oy) * Wo + ox) * col.cols();
      for (int c = 0; c < C; ++c) {
        const T* src = x.plane(n, c);
        for (int i = 0; i < k; ++i) {
          int iy = oy * stride - pad + i;
          for (int j = 0; j < k; ++j) {
            int ix = ox * stride - pad + j;
            *row++ = (iy >= 0 && iy < H && ix >= 0 && ix < W) ? src[iy * W + ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_accum(const MatrixRM<T>& col, int k, int stride, int pad, Tensor<T>& gx, int n) {
  const int H = gx.h(), W = gx.w(), C = gx.c();
  const int Ho = (H + 2 * pad - k) / stride + 1;
  const int Wo = (W + 2 * pad - k) / stride + 1;
  for (int oy = 0; oy < Ho; ++oy) {
    for (int ox = 0; ox < Wo; ++ox) {
      const T* row = col.data() + (static_cast<size_t>(oy) * Wo + ox) * col.cols();
      for (int c = 0; c < C; ++c) {
        T* dst = gx.plane(n, c);
        for (int i = 0; i < k; ++i) {
          int iy = oy * stride - pad + i;
          for (int j = 0; j < k; ++j) {
            int ix = ox * stride - pad + j;
            if (iy >= 0 && iy < H && ix >= 0 && ix < W) dst[iy * W + ix] += *row;
            ++row;
          }
        }
      }
    }
  }
}

}  // namespace detail

// x (N,Ci,H,W), w (Co,Ci,k,k), b (1,Co,1,1). Zero padding.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, int stride, int pad) {
  const auto& xv = x->val;
  const auto& wv = w->val;
  const int k = wv.h();
  check(wv.w() == k, "conv2d: non-square kernel");
  check(wv.c() == xv.c(), "conv2d: in-channel mismatch " + wv.shape_str() + " vs " + xv.shape_str());
  check(b->val.c() == wv.n() && b->val.size() == static_cast<size_t>(wv.n()), "conv2d: bias shape");
  const int N = xv.n(), Co = wv.n();
  const int Ho = (xv.h() + 2 * pad - k) / stride + 1;
  const int Wo = (xv.w() + 2 * pad - k) / stride + 1;
  check(Ho > 0 && Wo > 0, "conv2d: output collapsed");

  Tensor<T> out(N, Co, Ho, Wo);
  const Eigen::Index K = static_cast<Eigen::Index>(xv.c()) * k * k;
  Eigen::Map<const MatrixRM<T>> Wm(wv.data(), Co, K);
  MatrixRM<T> col;
  for (int n = 0; n < N; ++n) {
    detail::im2col(xv, n, k, stride, pad, col);
    Eigen::Map<MatrixRM<T>> Y(out.plane(n, 0), Co, static_cast<Eigen::Index>(Ho) * Wo);
    Y.noalias() = Wm * col.transpose();
    for (int c = 0; c < Co; ++c) Y.row(c).array() += b->val[c];
  }

  int kk = k, ss = stride, pp = pad;
  return make_node<T>(std::move(out), {x, w, b}, [kk, ss, pp](Node<T>& n) {
    auto& x = n.parents[0];
    auto& w = n.parents[1];
    auto& b = n.parents[2];
    const auto& xv = x->val;
    const auto& wv = w->val;
    const int N = xv.n(), Co = wv.n();
    const int Ho = n.val.h(), Wo = n.val.w();
    const Eigen::Index K = static_cast<Eigen::Index>(xv.c()) * kk * kk;
    Eigen::Map<const MatrixRM<T>> Wm(wv.data(), Co, K);

    MatrixRM<T> col, dcol;
    for (int s = 0; s < N; ++s) {
      Eigen::Map<const MatrixRM<T>> G(n.grad.plane(s, 0), Co, static_cast<Eigen::Index>(Ho) * Wo);
      if (w->requires_grad || b->requires_grad) {
        if (w->requires_grad) {
          detail::im2col(xv, s, kk, ss, pp, col);
          Eigen::Map<MatrixRM<T>> dW(w->grad_buf().data(), Co, K);
          dW.noalias() += G * col;
        }
        if (b->requires_grad) {
          auto& gb = b->grad_buf();
          for (int c = 0; c < Co; ++c) gb[c] += G.row(c).sum();
        }
      }
      if (x->requires_grad) {
        dcol.resize(static_cast<Eigen::Index>(Ho) * Wo, K);
        dcol.noalias() = G.transpose() * Wm;
        detail::col2im_accum(dcol, kk, ss, pp, x->grad_buf(), s);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// 2-D DFT (orthonormal). Output stacks Re then Im along channels: (N,2C,H,W).

namespace detail {

template <typename T>
using MatCx = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
const MatCx<T>& dft_matrix_t(int n) {
  static std::map<int, MatCx<T>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  MatCx<T> f(n, n);
  const T scale = T(1) / std::sqrt(static_cast<T>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double ang = -2.0 * M_PI * j * k / n;
      f(j, k) = std::complex<T>(static_cast<T>(std::cos(ang)) * scale,
                                static_cast<T>(std::sin(ang)) * scale);
    }
  return cache.emplace(n, std::move(f)).first->second;
}

}  // namespace detail

template <typename T>
Var<T> dft2d(const Var<T>& x) {
  const auto& v = x->val;
  const auto& FH = detail::dft_matrix_t<T>(v.h());
  const auto& FW = detail::dft_matrix_t<T>(v.w());
  Tensor<T> out(v.n(), 2 * v.c(), v.h(), v.w());
  detail::MatCx<T> X(v.h(), v.w()), Y;
  for (int n = 0; n < v.n(); ++n)
    for (int c = 0; c < v.c(); ++c) {
      const T* src = v.plane(n, c);
      for (int i = 0; i < v.h(); ++i)
        for (int j = 0; j < v.w(); ++j) X(i, j) = std::complex<T>(src[i * v.w() + j], T(0));
      Y = FH * X * FW;
      T* re = out.plane(n, c);
      T* im = out.plane(n, v.c() + c);
      for (int i = 0; i < v.h(); ++i)
        for (int j = 0; j < v.w(); ++j) {
          re[i * v.w() + j] = Y(i, j).real();
          im[i * v.w() + j] = Y(i, j).imag();
        }
    }
  return make_node<T>(std::move(out), {x}, [](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    const auto& v = p->val;
    const auto& FH = detail::dft_matrix_t<T>(v.h());
    const auto& FW = detail::dft_matrix_t<T>(v.w());
    detail::MatCx<T> G(v.h(), v.w()), D;
    auto& g = p->grad_buf();
    for (int nn = 0; nn < v.n(); ++nn)
      for (int c = 0; c < v.c(); ++c) {
        const T* gre = n.grad.plane(nn, c);
        const T* gim = n.grad.plane(nn, v.c() + c);
        for (int i = 0; i < v.h(); ++i)
          for (int j = 0; j < v.w(); ++j)
            G(i, j) = std::complex<T>(gre[i * v.w() + j], gim[i * v.w() + j]);
        // dX = Re(FH^H G FW^H); FH, FW symmetric
        D = FH.conjugate() * G * FW.conjugate();
        T* dst = g.plane(nn, c);
        for (int i = 0; i < v.h(); ++i)
          for (int j = 0; j < v.w(); ++j) dst[i * v.w() + j] += D(i, j).real();
      }
  });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, int c0, int len) {
  const auto& v = x->val;
  check(c0 >= 0 && len > 0 && c0 + len <= v.c(), "slice_channels: range out of bounds");
  Tensor<T> out(v.n(), len, v.h(), v.w());
  const size_t plane = static_cast<size_t>(v.h()) * v.w();
  for (int n = 0; n < v.n(); ++n)
    for (int c = 0; c < len; ++c)
      std::copy(v.plane(n, c0 + c), v.plane(n, c0 + c) + plane, out.plane(n, c));
  return make_node<T>(std::move(out), {x}, [c0, len, plane](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    for (int nn = 0; nn < p->val.n(); ++nn)
      for (int c = 0; c < len; ++c) {
        const T* src = n.grad.plane(nn, c);
        T* dst = g.plane(nn, c0 + c);
        for (size_t i = 0; i < plane; ++i) dst[i] += src[i];
      }
  });
}

template <typename T>
Var<T> concat_batch(const Var<T>& a, const Var<T>& b) {
  const auto& va = a->val;
  const auto& vb = b->val;
  check(va.c() == vb.c() && va.h() == vb.h() && va.w() == vb.w(),
        "concat_batch: per-sample shape mismatch");
  Tensor<T> out(va.n() + vb.n(), va.c(), va.h(), va.w());
  std::copy(va.data(), va.data() + va.size(), out.data());
  std::copy(vb.data(), vb.data() + vb.size(), out.data() + va.size());
  return make_node<T>(std::move(out), {a, b}, [](Node<T>& n) {
    auto& a = n.parents[0];
    auto& b = n.parents[1];
    if (a->requires_grad) {
      auto& g = a->grad_buf();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (b->requires_grad) {
      auto& g = b->grad_buf();
      size_t off = a->val.size();
      for (size_t i = 0; i < g.size(); ++i) g[i] += n.grad[off + i];
    }
  });
}

template <typename T>
Var<T> slice_batch(const Var<T>& x, int n0, int len) {
  const auto& v = x->val;
  check(n0 >= 0 && len > 0 && n0 + len <= v.n(), "slice_batch: range out of bounds");
  Tensor<T> out(len, v.c(), v.h(), v.w());
  const size_t sample = static_cast<size_t>(v.c()) * v.h() * v.w();
  std::copy(v.data() + n0 * sample, v.data() + (n0 + len) * sample, out.data());
  return make_node<T>(std::move(out), {x}, [n0, len, sample](Node<T>& n) {
    auto& p = n.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    for (size_t i = 0; i < static_cast<size_t>(len) * sample; ++i)
      g[n0 * sample + i] += n.grad[i];
  });
}

// Mean of (x-y)^2 over every element.
template <typename T>
Var<T> mse(const Var<T>& a, const Var<T>& b) {
  return mean_all(square(sub(a, b)));
}

}  // namespace wmlab::ad
