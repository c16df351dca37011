#include "quantcal/tools/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "quantcal/datasim/io.hpp"
#include "quantcal/numerics/random.hpp"

namespace quantcal::tools {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("config: bad value for " + key + ": '" + text + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <typename T>
Setter number(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_number<T>(k, v); };
}

template <typename T>
Setter nested(std::function<T&(RunConfig&)> at) {
  return [at](RunConfig& c, const std::string& k, const std::string& v) { at(c) = parse_number<T>(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", number(&RunConfig::seed)},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"task", [](RunConfig& c, const std::string&, const std::string& v) { c.simulation.task = parse_task(v); }},
      {"image.size",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.simulation.height = c.simulation.width = parse_number<std::size_t>(k, v);
       }},
      {"data.n", number(&RunConfig::n_samples)},
      {"split.train", nested<double>([](RunConfig& c) -> double& { return c.split.train; })},
      {"split.calibration", nested<double>([](RunConfig& c) -> double& { return c.split.calibration; })},
      {"split.validation", nested<double>([](RunConfig& c) -> double& { return c.split.validation; })},
      {"noise.sigma_max", nested<double>([](RunConfig& c) -> double& { return c.simulation.sigma_max; })},
      {"noise.lambda_min", nested<double>([](RunConfig& c) -> double& { return c.simulation.lambda_min; })},
      {"noise.lambda_max", nested<double>([](RunConfig& c) -> double& { return c.simulation.lambda_max; })},
      {"mri.acceleration", nested<double>([](RunConfig& c) -> double& { return c.simulation.acceleration; })},
      {"mri.center_fraction",
       nested<double>([](RunConfig& c) -> double& { return c.simulation.center_fraction; })},
      {"model.channels",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.arch.channels = parse_list<std::size_t>(k, v);
       }},
      {"model.kernel_size", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.arch.kernel_size; })},
      {"model.embed_dim", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.arch.embedding.dim; })},
      {"model.embed_base",
       nested<double>([](RunConfig& c) -> double& { return c.arch.embedding.base_frequency; })},
      {"model.mlp_hidden",
       nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.arch.embedding.mlp_hidden; })},
      {"train.epochs", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.epochs; })},
      {"train.batch_size", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.batch_size; })},
      {"train.lr", nested<double>([](RunConfig& c) -> double& { return c.train.lr; })},
      {"train.q_min", nested<double>([](RunConfig& c) -> double& { return c.train.q_min; })},
      {"train.q_max", nested<double>([](RunConfig& c) -> double& { return c.train.q_max; })},
      {"train.checkpoint_every",
       nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.checkpoint_every; })},
      {"train.max_steps", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.max_steps; })},
      {"calib.alpha", number(&RunConfig::alpha)},
      {"calib.delta_q", nested<double>([](RunConfig& c) -> double& { return c.calibration.delta_q; })},
      {"calib.max_iters", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.calibration.max_iters; })},
      {"baseline.q_lower", nested<double>([](RunConfig& c) -> double& { return c.baseline.q_lower; })},
      {"baseline.q_upper", nested<double>([](RunConfig& c) -> double& { return c.baseline.q_upper; })},
      {"pdf.grid_min", number(&RunConfig::grid_min)},
      {"pdf.grid_max", number(&RunConfig::grid_max)},
      {"pdf.grid_count", number(&RunConfig::grid_count)},
      {"pdf.alpha_list",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.alpha_list = parse_list<double>(k, v); }},
      {"pdf.oracle_sigma", number(&RunConfig::oracle_sigma)},
      {"eval.intensity_bins",
       nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.eval.intensity_bins; })},
      {"eval.size_bins", nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.eval.size_bins; })},
      {"eval.bootstrap_resamples",
       nested<std::size_t>([](RunConfig& c) -> std::size_t& { return c.eval.bootstrap.resamples; })},
  };
  return table;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  simulation.seed = derive_seed(s, "simulate");
  split.seed = derive_seed(s, "split");
  train.seed = derive_seed(s, "train");
  eval.bootstrap.seed = derive_seed(s, "bootstrap");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (n_samples < 3) fail("data.n must be at least 3");
  if (output_dir.empty()) fail("output.dir is empty");
  switch (simulation.task) {
    case Task::gaussian:
    case Task::gaussian_hetero:
      if (!(simulation.sigma_max > 0.0)) fail("noise.sigma_max must be positive");
      break;
    case Task::poisson:
      if (!(simulation.lambda_min > 0.0 && simulation.lambda_min <= simulation.lambda_max)) {
        fail("noise.lambda_min/lambda_max must satisfy 0 < min <= max");
      }
      break;
    case Task::mri_undersample:
      if (!(simulation.acceleration >= 1.0)) fail("mri.acceleration must be >= 1");
      if (!(simulation.center_fraction > 0.0 && simulation.center_fraction <= 1.0)) {
        fail("mri.center_fraction must be in (0,1]");
      }
      break;
  }
  if (!(alpha > 0.0 && alpha < 1.0)) fail("calib.alpha must be in (0,1)");
  if (!(calibration.delta_q > 0.0)) fail("calib.delta_q must be positive");
  if (!(oracle_sigma > 0.0)) fail("pdf.oracle_sigma must be positive");
  try {
    arch.validate();
    train.validate();
    validate_q_grid(q_grid());
    if (simulation.height % (std::size_t{1} << arch.down_stages()) != 0) {
      fail("image.size must be divisible by 2^len(model.channels)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(e.what());
  }
  for (std::size_t i = 0; i < alpha_list.size(); ++i) {
    if (!(alpha_list[i] > 0.0 && alpha_list[i] < 1.0) || (i > 0 && alpha_list[i] <= alpha_list[i - 1])) {
      fail("pdf.alpha_list must be strictly ascending in (0,1)");
    }
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key " + key);
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key " + key);
    try {
      it->second(c, key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("config: bad value for " + key + ": " + e.what());
    }
  }
  c.set_seed(c.seed);
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  const auto& s = c.simulation;
  os << "seed = " << c.seed << '\n'
     << "output.dir = " << c.output_dir.string() << '\n'
     << "task = " << task_name(s.task) << '\n'
     << "image.size = " << s.height << '\n'
     << "data.n = " << c.n_samples << '\n'
     << "split.train = " << format_double(c.split.train) << '\n'
     << "split.calibration = " << format_double(c.split.calibration) << '\n'
     << "split.validation = " << format_double(c.split.validation) << '\n'
     << "noise.sigma_max = " << format_double(s.sigma_max) << '\n'
     << "noise.lambda_min = " << format_double(s.lambda_min) << '\n'
     << "noise.lambda_max = " << format_double(s.lambda_max) << '\n'
     << "mri.acceleration = " << format_double(s.acceleration) << '\n'
     << "mri.center_fraction = " << format_double(s.center_fraction) << '\n'
     << "model.channels = " << join(c.arch.channels) << '\n'
     << "model.kernel_size = " << c.arch.kernel_size << '\n'
     << "model.embed_dim = " << c.arch.embedding.dim << '\n'
     << "model.embed_base = " << format_double(c.arch.embedding.base_frequency) << '\n'
     << "model.mlp_hidden = " << c.arch.embedding.mlp_hidden << '\n'
     << "train.epochs = " << c.train.epochs << '\n'
     << "train.batch_size = " << c.train.batch_size << '\n'
     << "train.lr = " << format_double(c.train.lr) << '\n'
     << "train.q_min = " << format_double(c.train.q_min) << '\n'
     << "train.q_max = " << format_double(c.train.q_max) << '\n'
     << "train.checkpoint_every = " << c.train.checkpoint_every << '\n'
     << "train.max_steps = " << c.train.max_steps << '\n'
     << "calib.alpha = " << format_double(c.alpha) << '\n'
     << "calib.delta_q = " << format_double(c.calibration.delta_q) << '\n'
     << "calib.max_iters = " << c.calibration.max_iters << '\n'
     << "baseline.q_lower = " << format_double(c.baseline.q_lower) << '\n'
     << "baseline.q_upper = " << format_double(c.baseline.q_upper) << '\n'
     << "pdf.grid_min = " << format_double(c.grid_min) << '\n'
     << "pdf.grid_max = " << format_double(c.grid_max) << '\n'
     << "pdf.grid_count = " << c.grid_count << '\n';
  if (!c.alpha_list.empty()) os << "pdf.alpha_list = " << join(c.alpha_list) << '\n';
  os << "pdf.oracle_sigma = " << format_double(c.oracle_sigma) << '\n'
     << "eval.intensity_bins = " << c.eval.intensity_bins << '\n'
     << "eval.size_bins = " << c.eval.size_bins << '\n'
     << "eval.bootstrap_resamples = " << c.eval.bootstrap.resamples << '\n';
  return os.str();
}

}  // namespace quantcal::tools
