#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace hrc {

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d < 0) throw EngineError("negative extent in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

void Tensor::zero_grad() {
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  Tensor t;
  int64_t n = shape_numel(shape);
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(n, value);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size()))
    throw EngineError("value count does not match shape " + shape_str(shape));
  Tensor t;
  t.shape = std::move(shape);
  t.data = std::make_shared<std::vector<double>>(std::move(values));
  return t;
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::param(Shape shape, std::vector<double> values) {
  Tensor t = from(std::move(shape), std::move(values));
  t.requires_grad = true;
  t.grad = std::make_shared<std::vector<double>>(t.size(), 0.0);
  return t;
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw EngineError(std::string("non-finite value produced by ") + what);
}

int Tape::track(const Tensor& t) {
  if (t.node >= 0) return t.node;
  if (!t.requires_grad) return -1;
  auto it = leaf_ids_.find(t.data.get());
  if (it != leaf_ids_.end()) return it->second;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{t.size(), {}, nullptr});
  leaf_ids_.emplace(t.data.get(), id);
  leaves_.push_back(Leaf{id, t.grad});
  return id;
}

int Tape::add_node(int64_t out_size, std::vector<int> parents, BackFn back) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{out_size, std::move(parents), std::move(back)});
  return id;
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) throw EngineError("backward: loss must be scalar");
  int root = loss.node >= 0 ? loss.node
                            : (loss.requires_grad ? track(loss) : -1);
  if (root < 0) throw EngineError("backward: loss is not on the tape");

  // Only nodes the loss actually depends on are replayed.
  std::vector<char> reachable(nodes_.size(), 0);
  reachable[root] = 1;
  for (int id = root; id >= 0; --id) {
    if (!reachable[id]) continue;
    for (int p : nodes_[id].parents)
      if (p >= 0) reachable[p] = 1;
  }

  adjoints_.assign(nodes_.size(), {});
  for (size_t id = 0; id < nodes_.size(); ++id)
    if (reachable[id]) adjoints_[id].assign(nodes_[id].out_size, 0.0);
  adjoints_[root][0] = 1.0;

  for (int id = root; id >= 0; --id) {
    if (!reachable[id] || !nodes_[id].back) continue;
    nodes_[id].back(*this, adjoints_[id]);
  }

  for (const Leaf& leaf : leaves_) {
    if (!reachable[leaf.node]) continue;
    const auto& adj = adjoints_[leaf.node];
    auto& g = *leaf.grad;
    for (size_t i = 0; i < g.size(); ++i) g[i] += adj[i];
  }
  adjoints_.clear();
}

namespace ops {
namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw EngineError(msg);
}

void axpy(std::vector<double>& dst, const std::vector<double>& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Tensor conv2d(Tape* tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias, int stride, int padding) {
  require(input.shape.size() == 4, "conv2d: input must be NCHW");
  require(weight.shape.size() == 4, "conv2d: weight must be OIKhKw");
  const int N = input.shape[0], C = input.shape[1], H = input.shape[2],
            W = input.shape[3];
  const int O = weight.shape[0], I = weight.shape[1], KH = weight.shape[2],
            KW = weight.shape[3];
  require(C == I, "conv2d: input channels " + std::to_string(C) +
                      " != weight channels " + std::to_string(I));
  require(bias.size() == O, "conv2d: bias length must equal output channels");
  require(stride >= 1 && padding >= 0, "conv2d: bad stride/padding");
  const int num = H + 2 * padding - KH, numw = W + 2 * padding - KW;
  require(num >= 0 && numw >= 0 && num % stride == 0 && numw % stride == 0,
          "conv2d: non-integral output extent");
  const int OH = num / stride + 1, OW = numw / stride + 1;
  require(OH >= 1 && OW >= 1, "conv2d: empty output");

  Tensor out = Tensor::zeros({N, O, OH, OW});
  {
    const double* in = input.ptr();
    const double* w = weight.ptr();
    const double* b = bias.ptr();
    double* op = out.ptr();
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < O; ++o) {
        double* plane = op + (static_cast<int64_t>(n) * O + o) * OH * OW;
        std::fill(plane, plane + OH * OW, b[o]);
        for (int c = 0; c < C; ++c)
          for (int kh = 0; kh < KH; ++kh)
            for (int kw = 0; kw < KW; ++kw) {
              const double wv = w[((o * I + c) * KH + kh) * KW + kw];
              for (int oh = 0; oh < OH; ++oh) {
                const int ih = oh * stride - padding + kh;
                if (ih < 0 || ih >= H) continue;
                const double* inrow =
                    in + (static_cast<int64_t>(n) * C + c) * H * W + ih * W;
                double* outrow = plane + oh * OW;
                int ow0 = 0, ow1 = OW - 1;
                while (ow0 <= ow1 && ow0 * stride - padding + kw < 0) ++ow0;
                while (ow1 >= ow0 && ow1 * stride - padding + kw >= W) --ow1;
                const int base = -padding + kw;
                if (stride == 1) {
                  const double* irow = inrow + base + ow0;
                  for (int ow = ow0; ow <= ow1; ++ow)
                    outrow[ow] += wv * irow[ow - ow0];
                } else {
                  for (int ow = ow0; ow <= ow1; ++ow)
                    outrow[ow] += wv * inrow[ow * stride + base];
                }
              }
            }
      }
  }
  check_finite(out.values(), "conv2d");

  if (tape) {
    int pi = tape->track(input), pw = tape->track(weight),
        pb = tape->track(bias);
    if (pi >= 0 || pw >= 0 || pb >= 0) {
      auto in_data = input.data;
      auto w_data = weight.data;
      out.node = tape->add_node(
          out.size(), {pi, pw, pb},
          [=](Tape& tp, const std::vector<double>& oa) {
            const double* in = in_data->data();
            const double* w = w_data->data();
            if (pb >= 0) {
              auto& db = tp.adjoint(pb);
              for (int n = 0; n < N; ++n)
                for (int o = 0; o < O; ++o) {
                  const double* plane =
                      oa.data() + (static_cast<int64_t>(n) * O + o) * OH * OW;
                  double s = 0;
                  for (int i = 0; i < OH * OW; ++i) s += plane[i];
                  db[o] += s;
                }
            }
            if (pw >= 0) {
              auto& dw = tp.adjoint(pw);
              for (int n = 0; n < N; ++n)
                for (int o = 0; o < O; ++o) {
                  const double* plane =
                      oa.data() + (static_cast<int64_t>(n) * O + o) * OH * OW;
                  for (int c = 0; c < C; ++c)
                    for (int kh = 0; kh < KH; ++kh)
                      for (int kw = 0; kw < KW; ++kw) {
                        double s = 0;
                        for (int oh = 0; oh < OH; ++oh) {
                          const int ih = oh * stride - padding + kh;
                          if (ih < 0 || ih >= H) continue;
                          const double* inrow =
                              in + (static_cast<int64_t>(n) * C + c) * H * W +
                              ih * W;
                          const double* outrow = plane + oh * OW;
                          for (int ow = 0; ow < OW; ++ow) {
                            const int iw = ow * stride - padding + kw;
                            if (iw < 0 || iw >= W) continue;
                            s += outrow[ow] * inrow[iw];
                          }
                        }
                        dw[((o * I + c) * KH + kh) * KW + kw] += s;
                      }
                }
            }
            if (pi >= 0) {
              auto& dx = tp.adjoint(pi);
              for (int n = 0; n < N; ++n)
                for (int o = 0; o < O; ++o) {
                  const double* plane =
                      oa.data() + (static_cast<int64_t>(n) * O + o) * OH * OW;
                  for (int c = 0; c < C; ++c)
                    for (int kh = 0; kh < KH; ++kh)
                      for (int kw = 0; kw < KW; ++kw) {
                        const double wv = w[((o * I + c) * KH + kh) * KW + kw];
                        for (int oh = 0; oh < OH; ++oh) {
                          const int ih = oh * stride - padding + kh;
                          if (ih < 0 || ih >= H) continue;
                          double* dxrow =
                              dx.data() +
                              (static_cast<int64_t>(n) * C + c) * H * W +
                              ih * W;
                          const double* outrow = plane + oh * OW;
                          for (int ow = 0; ow < OW; ++ow) {
                            const int iw = ow * stride - padding + kw;
                            if (iw < 0 || iw >= W) continue;
                            dxrow[iw] += wv * outrow[ow];
                          }
                        }
                      }
                }
            }
          });
    }
  }
  return out;
}

Tensor maxpool2x2(Tape* tape, const Tensor& input) {
  require(input.shape.size() == 4, "maxpool2x2: input must be NCHW");
  const int N = input.shape[0], C = input.shape[1], H = input.shape[2],
            W = input.shape[3];
  require(H % 2 == 0 && W % 2 == 0, "maxpool2x2: odd spatial extent");
  const int OH = H / 2, OW = W / 2;
  Tensor out = Tensor::zeros({N, C, OH, OW});
  auto argmax = std::make_shared<std::vector<int64_t>>(out.size());
  {
    const double* in = input.ptr();
    double* op = out.ptr();
    int64_t oi = 0;
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const int64_t base = (static_cast<int64_t>(n) * C + c) * H * W;
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow, ++oi) {
            // first argmax in row-major order wins on ties
            int64_t best = base + (2 * oh) * W + 2 * ow;
            double bv = in[best];
            const int64_t cand[3] = {best + 1, best + W, best + W + 1};
            for (int64_t ci : cand)
              if (in[ci] > bv) {
                bv = in[ci];
                best = ci;
              }
            op[oi] = bv;
            (*argmax)[oi] = best;
          }
      }
  }
  check_finite(out.values(), "maxpool2x2");
  if (tape) {
    int pi = tape->track(input);
    if (pi >= 0) {
      out.node = tape->add_node(
          out.size(), {pi}, [=](Tape& tp, const std::vector<double>& oa) {
            auto& dx = tp.adjoint(pi);
            for (size_t i = 0; i < oa.size(); ++i) dx[(*argmax)[i]] += oa[i];
          });
    }
  }
  return out;
}

Tensor prelu(Tape* tape, const Tensor& input, const Tensor& slope) {
  require(input.shape.size() == 4, "prelu: input must be NCHW");
  const int N = input.shape[0], C = input.shape[1],
            HW = input.shape[2] * input.shape[3];
  require(slope.size() == C, "prelu: slope length must equal channel count");
  Tensor out = Tensor::zeros(input.shape);
  {
    const double* in = input.ptr();
    const double* a = slope.ptr();
    double* op = out.ptr();
    int64_t i = 0;
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const double ac = a[c];
        for (int k = 0; k < HW; ++k, ++i)
          op[i] = in[i] > 0 ? in[i] : ac * in[i];
      }
  }
  check_finite(out.values(), "prelu");
  if (tape) {
    int pi = tape->track(input), pa = tape->track(slope);
    if (pi >= 0 || pa >= 0) {
      auto in_data = input.data;
      auto a_data = slope.data;
      out.node = tape->add_node(
          out.size(), {pi, pa}, [=](Tape& tp, const std::vector<double>& oa) {
            const double* in = in_data->data();
            const double* a = a_data->data();
            int64_t i = 0;
            for (int n = 0; n < N; ++n)
              for (int c = 0; c < C; ++c) {
                const double ac = a[c];
                double dac = 0;
                for (int k = 0; k < HW; ++k, ++i) {
                  if (in[i] > 0) {
                    if (pi >= 0) tp.adjoint(pi)[i] += oa[i];
                  } else {
                    if (pi >= 0) tp.adjoint(pi)[i] += ac * oa[i];
                    dac += in[i] * oa[i];
                  }
                }
                if (pa >= 0) tp.adjoint(pa)[c] += dac;
              }
          });
    }
  }
  return out;
}

Tensor global_avg_pool(Tape* tape, const Tensor& input) {
  require(input.shape.size() == 4, "global_avg_pool: input must be NCHW");
  const int N = input.shape[0], C = input.shape[1],
            HW = input.shape[2] * input.shape[3];
  require(HW >= 1, "global_avg_pool: empty spatial extent");
  Tensor out = Tensor::zeros({N, C});
  {
    const double* in = input.ptr();
    double* op = out.ptr();
    for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
      double s = 0;
      for (int k = 0; k < HW; ++k) s += in[nc * HW + k];
      op[nc] = s / HW;
    }
  }
  check_finite(out.values(), "global_avg_pool");
  if (tape) {
    int pi = tape->track(input);
    if (pi >= 0) {
      out.node = tape->add_node(
          out.size(), {pi}, [=](Tape& tp, const std::vector<double>& oa) {
            auto& dx = tp.adjoint(pi);
            for (int64_t nc = 0; nc < static_cast<int64_t>(N) * C; ++nc) {
              const double g = oa[nc] / HW;
              for (int k = 0; k < HW; ++k) dx[nc * HW + k] += g;
            }
          });
    }
  }
  return out;
}

Tensor affine(Tape* tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias) {
  require(input.shape.size() == 2, "affine: input must be N x C");
  const int N = input.shape[0], C = input.shape[1];
  require(weight.size() == C, "affine: weight width mismatch");
  require(bias.size() == 1, "affine: bias must be scalar");
  Tensor out = Tensor::zeros({N, 1});
  {
    const double* in = input.ptr();
    const double* w = weight.ptr();
    const double b = bias.values()[0];
    for (int n = 0; n < N; ++n) {
      double s = b;
      for (int c = 0; c < C; ++c) s += in[n * C + c] * w[c];
      out.values()[n] = s;
    }
  }
  check_finite(out.values(), "affine");
  if (tape) {
    int pi = tape->track(input), pw = tape->track(weight),
        pb = tape->track(bias);
    if (pi >= 0 || pw >= 0 || pb >= 0) {
      auto in_data = input.data;
      auto w_data = weight.data;
      out.node = tape->add_node(
          out.size(), {pi, pw, pb},
          [=](Tape& tp, const std::vector<double>& oa) {
            const double* in = in_data->data();
            const double* w = w_data->data();
            for (int n = 0; n < N; ++n) {
              const double g = oa[n];
              if (pi >= 0)
                for (int c = 0; c < C; ++c) tp.adjoint(pi)[n * C + c] += g * w[c];
              if (pw >= 0)
                for (int c = 0; c < C; ++c)
                  tp.adjoint(pw)[c] += g * in[n * C + c];
              if (pb >= 0) tp.adjoint(pb)[0] += g;
            }
          });
    }
  }
  return out;
}

namespace {

Tensor reduced_loss(Tape* tape, const Tensor& pred, const Tensor& target,
                    const char* name, double (*f)(double),
                    double (*df)(double)) {
  require(pred.shape == target.shape,
          std::string(name) + ": shape mismatch " + shape_str(pred.shape) +
              " vs " + shape_str(target.shape));
  const int64_t M = pred.size();
  require(M > 0, std::string(name) + ": empty input");
  double s = 0;
  for (int64_t i = 0; i < M; ++i) s += f(pred.values()[i] - target.values()[i]);
  Tensor out = Tensor::scalar(s / M);
  check_finite(out.values(), name);
  if (tape) {
    int pp = tape->track(pred), pt = tape->track(target);
    if (pp >= 0 || pt >= 0) {
      auto p_data = pred.data;
      auto t_data = target.data;
      out.node = tape->add_node(
          1, {pp, pt}, [=](Tape& tp, const std::vector<double>& oa) {
            const double g = oa[0] / M;
            for (int64_t i = 0; i < M; ++i) {
              const double d = (*p_data)[i] - (*t_data)[i];
              const double gi = g * df(d);
              if (pp >= 0) tp.adjoint(pp)[i] += gi;
              if (pt >= 0) tp.adjoint(pt)[i] -= gi;
            }
          });
    }
  }
  return out;
}

double l1_f(double d) { return std::abs(d); }
// subgradient at d = 0 is defined as 0
double l1_df(double d) { return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0); }
double sl1_f(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}
double sl1_df(double d) {
  return std::abs(d) < 1.0 ? d : (d > 0 ? 1.0 : -1.0);
}

}  // namespace

Tensor l1_loss(Tape* tape, const Tensor& pred, const Tensor& target) {
  return reduced_loss(tape, pred, target, "l1_loss", l1_f, l1_df);
}

Tensor smooth_l1_loss(Tape* tape, const Tensor& pred, const Tensor& target) {
  return reduced_loss(tape, pred, target, "smooth_l1_loss", sl1_f, sl1_df);
}

Tensor detach(const Tensor& x) {
  return Tensor::from(x.shape, x.values());
}

Tensor channel_weighted_sum(Tape* tape, const Tensor& features,
                            const std::vector<double>& coeff) {
  require(features.shape.size() == 4,
          "channel_weighted_sum: features must be NCHW");
  const int N = features.shape[0], C = features.shape[1],
            HW = features.shape[2] * features.shape[3];
  require(static_cast<int>(coeff.size()) == C,
          "channel_weighted_sum: width mismatch");
  Tensor out = Tensor::zeros({N, features.shape[2], features.shape[3]});
  {
    const double* in = features.ptr();
    double* op = out.ptr();
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const double wc = coeff[c];
        const double* plane = in + (static_cast<int64_t>(n) * C + c) * HW;
        double* oplane = op + static_cast<int64_t>(n) * HW;
        for (int k = 0; k < HW; ++k) oplane[k] += wc * plane[k];
      }
  }
  check_finite(out.values(), "channel_weighted_sum");
  if (tape) {
    int pi = tape->track(features);
    if (pi >= 0) {
      out.node = tape->add_node(
          out.size(), {pi}, [=](Tape& tp, const std::vector<double>& oa) {
            auto& dx = tp.adjoint(pi);
            for (int n = 0; n < N; ++n)
              for (int c = 0; c < C; ++c) {
                const double wc = coeff[c];
                double* dplane =
                    dx.data() + (static_cast<int64_t>(n) * C + c) * HW;
                const double* oplane = oa.data() + static_cast<int64_t>(n) * HW;
                for (int k = 0; k < HW; ++k) dplane[k] += wc * oplane[k];
              }
          });
    }
  }
  return out;
}

Tensor normalize_per_sample(Tape* tape, const Tensor& maps, double eps) {
  require(maps.shape.size() == 3, "normalize_per_sample: maps must be N x h x w");
  const int N = maps.shape[0], HW = maps.shape[1] * maps.shape[2];
  require(HW >= 1, "normalize_per_sample: empty map");
  Tensor out = Tensor::zeros(maps.shape);
  auto inv_denom = std::make_shared<std::vector<double>>(N);
  {
    const double* in = maps.ptr();
    double* op = out.ptr();
    for (int n = 0; n < N; ++n) {
      const double* plane = in + static_cast<int64_t>(n) * HW;
      double mn = plane[0], mx = plane[0];
      for (int k = 1; k < HW; ++k) {
        mn = std::min(mn, plane[k]);
        mx = std::max(mx, plane[k]);
      }
      // min/max enter as gradient constants
      const double inv = 1.0 / (mx - mn + eps);
      (*inv_denom)[n] = inv;
      double* oplane = op + static_cast<int64_t>(n) * HW;
      for (int k = 0; k < HW; ++k) oplane[k] = (plane[k] - mn) * inv;
    }
  }
  check_finite(out.values(), "normalize_per_sample");
  if (tape) {
    int pi = tape->track(maps);
    if (pi >= 0) {
      out.node = tape->add_node(
          out.size(), {pi}, [=](Tape& tp, const std::vector<double>& oa) {
            auto& dx = tp.adjoint(pi);
            for (int n = 0; n < N; ++n) {
              const double inv = (*inv_denom)[n];
              for (int k = 0; k < HW; ++k)
                dx[static_cast<int64_t>(n) * HW + k] +=
                    inv * oa[static_cast<int64_t>(n) * HW + k];
            }
          });
    }
  }
  return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
  require(a.shape == b.shape, "add: shape mismatch");
  Tensor out = Tensor::zeros(a.shape);
  for (int64_t i = 0; i < a.size(); ++i)
    out.values()[i] = a.values()[i] + b.values()[i];
  check_finite(out.values(), "add");
  if (tape) {
    int pa = tape->track(a), pb = tape->track(b);
    if (pa >= 0 || pb >= 0) {
      out.node = tape->add_node(
          out.size(), {pa, pb}, [=](Tape& tp, const std::vector<double>& oa) {
            if (pa >= 0) axpy(tp.adjoint(pa), oa);
            if (pb >= 0) axpy(tp.adjoint(pb), oa);
          });
    }
  }
  return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
  require(a.shape == b.shape, "mul: shape mismatch");
  Tensor out = Tensor::zeros(a.shape);
  for (int64_t i = 0; i < a.size(); ++i)
    out.values()[i] = a.values()[i] * b.values()[i];
  check_finite(out.values(), "mul");
  if (tape) {
    int pa = tape->track(a), pb = tape->track(b);
    if (pa >= 0 || pb >= 0) {
      auto ad = a.data, bd = b.data;
      out.node = tape->add_node(
          out.size(), {pa, pb}, [=](Tape& tp, const std::vector<double>& oa) {
            for (size_t i = 0; i < oa.size(); ++i) {
              if (pa >= 0) tp.adjoint(pa)[i] += oa[i] * (*bd)[i];
              if (pb >= 0) tp.adjoint(pb)[i] += oa[i] * (*ad)[i];
            }
          });
    }
  }
  return out;
}

Tensor scale(Tape* tape, const Tensor& a, double c) {
  Tensor out = Tensor::zeros(a.shape);
  for (int64_t i = 0; i < a.size(); ++i) out.values()[i] = c * a.values()[i];
  check_finite(out.values(), "scale");
  if (tape) {
    int pa = tape->track(a);
    if (pa >= 0) {
      out.node = tape->add_node(
          out.size(), {pa}, [=](Tape& tp, const std::vector<double>& oa) {
            auto& da = tp.adjoint(pa);
            for (size_t i = 0; i < oa.size(); ++i) da[i] += c * oa[i];
          });
    }
  }
  return out;
}

Tensor sum(Tape* tape, const Tensor& a) {
  double s = 0;
  for (double v : a.values()) s += v;
  Tensor out = Tensor::scalar(s);
  check_finite(out.values(), "sum");
  if (tape) {
    int pa = tape->track(a);
    if (pa >= 0) {
      out.node = tape->add_node(
          1, {pa}, [=](Tape& tp, const std::vector<double>& oa) {
            auto& da = tp.adjoint(pa);
            for (auto& g : da) g += oa[0];
          });
    }
  }
  return out;
}

}  // namespace ops

AdamState AdamState::init(const std::vector<Tensor*>& params, AdamConfig cfg) {
  AdamState st;
  st.cfg = cfg;
  for (const Tensor* p : params) {
    st.m.emplace_back(p->size(), 0.0);
    st.v.emplace_back(p->size(), 0.0);
  }
  return st;
}

void adam_step(const std::vector<Tensor*>& params, AdamState& state) {
  if (params.size() != state.m.size())
    throw EngineError("adam_step: state/parameter count mismatch");
  state.t += 1;
  const AdamConfig& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = *params[pi];
    if (!p.grad || static_cast<int64_t>(state.m[pi].size()) != p.size())
      throw EngineError("adam_step: parameter shape/grad mismatch");
    auto& th = p.values();
    const auto& g0 = *p.grad;
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    for (size_t i = 0; i < th.size(); ++i) {
      const double g = g0[i] + c.weight_decay * th[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      th[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

double grad_check(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor x,
                  double eps) {
  const int64_t n = x.size();
  std::vector<double> analytic(n, 0.0);
  {
    Tensor xp = Tensor::param(x.shape, x.values());
    Tape tape;
    Tensor y = f(tape, xp);
    if (y.size() != 1) throw EngineError("grad_check: f must be scalar-valued");
    if (y.node >= 0 || y.requires_grad) {
      tape.backward(y);
      analytic = *xp.grad;
    }
    // untracked output means f is constant in x; analytic gradient is zero
  }
  double worst = 0;
  Tensor probe = Tensor::from(x.shape, x.values());
  for (int64_t i = 0; i < n; ++i) {
    const double saved = probe.values()[i];
    Tape t1, t2;
    probe.values()[i] = saved + eps;
    const double fp = f(t1, probe).values()[0];
    probe.values()[i] = saved - eps;
    const double fm = f(t2, probe).values()[0];
    probe.values()[i] = saved;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace hrc
