#ifndef HRC_TENSOR_HPP
#define HRC_TENSOR_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hrc {

// Engine errors (bad shapes, non-finite results, malformed graphs).
class EngineError : public std::runtime_error {
 public:
  explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// N-dimensional real array, row-major doubles. Gradient buffers are
// persistent per leaf and accumulate across backward passes until zeroed.
struct Tensor {
  Shape shape;
  std::shared_ptr<std::vector<double>> data;
  std::shared_ptr<std::vector<double>> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  int node = -1;  // id on the current tape, -1 when untracked

  Tensor() = default;

  int64_t size() const { return data ? static_cast<int64_t>(data->size()) : 0; }
  double* ptr() { return data->data(); }
  const double* ptr() const { return data->data(); }
  std::vector<double>& values() { return *data; }
  const std::vector<double>& values() const { return *data; }

  void zero_grad();

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  // Leaf parameter: participates in the tape, owns a grad buffer.
  static Tensor param(Shape shape, std::vector<double> values);
};

// Throws EngineError if any element is NaN/Inf.
void check_finite(const std::vector<double>& v, const char* what);

// Record of one forward pass, replayed in reverse for adjoints.
// One tape per forward pass; create fresh, backward once, discard.
class Tape {
 public:
  // Returns the node id for a tensor, registering requires_grad leaves on
  // first sight. -1 for untracked constants.
  int track(const Tensor& t);
  using BackFn = std::function<void(Tape&, const std::vector<double>&)>;
  int add_node(int64_t out_size, std::vector<int> parents, BackFn back);

  std::vector<double>& adjoint(int node) { return adjoints_[node]; }

  // Accumulates d(loss)/d(leaf) into every leaf's grad buffer.
  void backward(const Tensor& loss);

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    int64_t out_size;
    std::vector<int> parents;
    BackFn back;  // empty for leaves
  };
  struct Leaf {
    int node;
    std::shared_ptr<std::vector<double>> grad;
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> adjoints_;
  std::unordered_map<const std::vector<double>*, int> leaf_ids_;
  std::vector<Leaf> leaves_;
};

namespace ops {

// All ops run eagerly; they record on `tape` only when it is non-null and
// some operand is tracked. Pass tape = nullptr for inference.

Tensor conv2d(Tape* tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias, int stride, int padding);
Tensor maxpool2x2(Tape* tape, const Tensor& input);
Tensor prelu(Tape* tape, const Tensor& input, const Tensor& slope);
Tensor global_avg_pool(Tape* tape, const Tensor& input);
Tensor affine(Tape* tape, const Tensor& input, const Tensor& weight,
              const Tensor& bias);
Tensor l1_loss(Tape* tape, const Tensor& pred, const Tensor& target);
Tensor smooth_l1_loss(Tape* tape, const Tensor& pred, const Tensor& target);
Tensor detach(const Tensor& x);

// CAM primitive: out[n,y,x] = sum_c coeff[c] * features[n,c,y,x].
// Coefficients are plain constants (callers detach the linear weights).
Tensor channel_weighted_sum(Tape* tape, const Tensor& features,
                            const std::vector<double>& coeff);

// Per-sample min-max normalization of an N x h x w stack; min and max are
// treated as gradient constants.
Tensor normalize_per_sample(Tape* tape, const Tensor& maps, double eps);

// Utility ops (used by losses, tests and the gradient checker).
Tensor add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape* tape, const Tensor& a, double c);
Tensor sum(Tape* tape, const Tensor& a);

}  // namespace ops

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// First/second moment buffers per parameter plus a shared step counter.
struct AdamState {
  AdamConfig cfg;
  int64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState init(const std::vector<Tensor*>& params, AdamConfig cfg);
};

// Classic Adam with bias correction; weight decay is coupled L2 (wd * theta
// added to the gradient before the moment updates). Reads param->grad.
void adam_step(const std::vector<Tensor*>& params, AdamState& state);

// Compares reverse-mode gradients of a scalar-valued function against
// central finite differences. Returns the worst relative error with
// denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor x,
                  double eps);

}  // namespace hrc

#endif
