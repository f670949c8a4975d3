#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "tgeval/corpus.hpp"
#include "tgeval/rng.hpp"

namespace tgeval {

using ParamValue = std::variant<double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

/// A system under evaluation: produces n samples for a parameter set and a
/// seed. Training, if any, is the model's own business. Implementations
/// throw ModelError on failure and must be safe to call concurrently.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::string name() const = 0;
  virtual Corpus generate(const ParamMap& params, RngSeed seed, std::size_t n) const = 0;
};

/// synthetic_sampler over a fixed corpus, driven by the "dropout" and "swap"
/// parameters (both default to 0).
class SyntheticModel final : public Model {
 public:
  explicit SyntheticModel(Corpus source) : source_(std::move(source)) {}

  std::string name() const override { return "builtin:synthetic"; }
  Corpus generate(const ParamMap& params, RngSeed seed, std::size_t n) const override;

 private:
  Corpus source_;
};

/// Runs `<command> <params.json> <output_samples.txt>`. params.json holds
/// the parameters plus "seed" and "n_samples"; the command writes exactly n
/// lines and exits 0. Any other exit status, a missing or short output file,
/// or exceeding the timeout is a ModelError carrying the tail of stderr.
class CommandModel final : public Model {
 public:
  CommandModel(std::filesystem::path command, std::chrono::duration<double> timeout,
               std::filesystem::path scratch_dir = {});

  std::string name() const override { return "cmd:" + command_.string(); }
  Corpus generate(const ParamMap& params, RngSeed seed, std::size_t n) const override;

 private:
  std::filesystem::path command_;
  std::chrono::duration<double> timeout_;
  std::filesystem::path scratch_dir_;
};

/// "builtin:synthetic" or "cmd:PATH".
std::unique_ptr<Model> make_model(std::string_view spec, const Corpus& synthetic_source,
                                  std::chrono::duration<double> timeout);

}  // namespace tgeval
