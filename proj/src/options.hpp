#ifndef HRC_OPTIONS_HPP
#define HRC_OPTIONS_HPP

#include <map>
#include <string>

#include "data.hpp"
#include "model.hpp"
#include "training.hpp"

namespace hrc {

// Merged run configuration. Precedence: explicit set() (CLI flags) beats
// load_file() beats built-in defaults. Unknown keys are errors.
class Options {
 public:
  Options();

  // UTF-8 lines of `key = value`, '#' comments, no sections.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;

  SyntheticConfig synthetic() const;
  ModelConfig model() const;
  TrainConfig trainer() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace hrc

#endif
