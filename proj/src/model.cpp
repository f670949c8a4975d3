#include "tgeval/model.hpp"

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "tgeval/errors.hpp"
#include "tgeval/perturb.hpp"

namespace tgeval {

namespace {

double real_param(const ParamMap& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) return 0.0;
  if (const auto* value = std::get_if<double>(&it->second)) return *value;
  throw ModelError("parameter '" + name + "' must be numeric");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string tail(const std::string& text, std::size_t limit = 2000) {
  return text.size() <= limit ? text : text.substr(text.size() - limit);
}

// One sentence per line; blank lines are kept as empty samples.
Corpus parse_sample_lines(const std::string& text) {
  std::vector<Sentence> sentences;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    sentences.push_back(tokenize(line));
    pos = end + 1;
  }
  return Corpus(std::move(sentences));
}

std::atomic<std::uint64_t> g_invocation{0};

}  // namespace

Corpus SyntheticModel::generate(const ParamMap& params, RngSeed seed, std::size_t n) const {
  for (const auto& [name, value] : params) {
    if (name != "dropout" && name != "swap") {
      throw ModelError("synthetic model has no parameter '" + name + "'");
    }
  }
  PerturbationConfig cfg{real_param(params, "dropout"), real_param(params, "swap"), seed};
  try {
    return synthetic_sampler(source_, cfg, n);
  } catch (const UsageError& e) {
    throw ModelError(std::string("synthetic model: ") + e.what());
  }
}

CommandModel::CommandModel(std::filesystem::path command,
                           std::chrono::duration<double> timeout,
                           std::filesystem::path scratch_dir)
    : command_(std::move(command)), timeout_(timeout), scratch_dir_(std::move(scratch_dir)) {
  if (scratch_dir_.empty()) scratch_dir_ = std::filesystem::temp_directory_path();
}

Corpus CommandModel::generate(const ParamMap& params, RngSeed seed, std::size_t n) const {
  const auto dir = scratch_dir_ / ("tgeval-" + std::to_string(::getpid()) + "-" +
                                   std::to_string(g_invocation++));
  std::filesystem::create_directories(dir);
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  const auto params_path = dir / "params.json";
  const auto output_path = dir / "samples.txt";
  const auto stderr_path = dir / "stderr.txt";
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : params) {
    std::visit([&](const auto& v) { j[name] = v; }, value);
  }
  j["seed"] = seed.value;
  j["n_samples"] = n;
  std::ofstream(params_path) << j.dump() << '\n';

  const std::string cmd = command_.string();
  const std::string params_arg = params_path.string();
  const std::string output_arg = output_path.string();
  const std::string stderr_file = stderr_path.string();

  const pid_t pid = ::fork();
  if (pid < 0) throw ModelError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    const int err = ::open(stderr_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (err >= 0) ::dup2(err, STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDWR);
    if (devnull >= 0) {
      ::dup2(devnull, STDIN_FILENO);
      ::dup2(devnull, STDOUT_FILENO);
    }
    char* argv[] = {const_cast<char*>(cmd.c_str()), const_cast<char*>(params_arg.c_str()),
                    const_cast<char*>(output_arg.c_str()), nullptr};
    ::execvp(argv[0], argv);
    ::_exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) {
      throw ModelError(std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw ModelError(name() + " timed out after " + std::to_string(timeout_.count()) +
                       " s");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  const auto diagnostics = tail(read_file(stderr_path));
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string how = WIFEXITED(status)
                                ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                : "was killed by signal " + std::to_string(WTERMSIG(status));
    throw ModelError(name() + " " + how + (diagnostics.empty() ? "" : ": " + diagnostics));
  }
  if (!std::filesystem::exists(output_path)) {
    throw ModelError(name() + " wrote no output file");
  }
  auto samples = parse_sample_lines(read_file(output_path));
  if (samples.size() != n) {
    throw ModelError(name() + " wrote " + std::to_string(samples.size()) +
                     " samples, expected " + std::to_string(n));
  }
  return samples;
}

std::unique_ptr<Model> make_model(std::string_view spec, const Corpus& synthetic_source,
                                  std::chrono::duration<double> timeout) {
  if (spec == "builtin:synthetic") return std::make_unique<SyntheticModel>(synthetic_source);
  if (spec.starts_with("cmd:") && spec.size() > 4) {
    return std::make_unique<CommandModel>(std::string(spec.substr(4)), timeout);
  }
  throw UsageError("unknown model '" + std::string(spec) +
                   "' (expected builtin:synthetic or cmd:PATH)");
}

}  // namespace tgeval
