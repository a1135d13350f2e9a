#include "echolab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "echolab/error.hpp"

namespace echolab {

namespace {

const char* const kKinds[] = {"rmt_otoc_le", "iho", "syk", "haar_check", "finite_temp"};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T value{};
  is >> value;
  std::string rest;
  if (is.fail() || (is >> rest)) throw InvalidArgument("config: cannot parse '" + text + "' for " + key);
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  const double v = parse_number<double>(key, text);
  if (!std::isfinite(v)) throw InvalidArgument("config: " + key + " must be finite");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  return parse_number<int>(key, text);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw InvalidArgument("config: " + key + " expects a boolean, got '" + text + "'");
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<long long> parse_list(const std::string& key, const std::string& text) {
  std::vector<long long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<long long>(key, trim(item)));
  return out;
}

// Short keys accepted without a section prefix, used by the sweep and CLI flags.
std::string canonical_key(const std::string& key) {
  static const std::pair<const char*, const char*> aliases[] = {
      {"delta", "model.delta"},        {"beta", "model.beta"},
      {"d_b", "model.d_b"},            {"d_a", "model.d_a"},
      {"g", "syk.g"},                  {"n_fermions", "syk.n_fermions"},
      {"t_max", "grid.t_max"},         {"n_points", "grid.n_points"},
      {"realizations", "experiment.realizations"}, {"seed", "experiment.seed"},
      {"threads", "experiment.threads"}, {"kind", "experiment.kind"}};
  for (const auto& [from, to] : aliases)
    if (key == from) return to;
  return key;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKinds[static_cast<int>(kind)]; }

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (int i = 0; i < 5; ++i)
    if (name == kKinds[i]) return static_cast<ExperimentKind>(i);
  throw InvalidArgument("unknown experiment '" + name +
                        "' (expected rmt_otoc_le, iho, syk, haar_check or finite_temp)");
}

void set_config_value(ExperimentConfig& c, const std::string& raw_key, const std::string& raw) {
  const std::string key = canonical_key(raw_key);
  const std::string v = trim(raw);
  // The IHO coupling shares the generic delta key when the IHO experiment is selected.
  if (raw_key == "delta" && c.experiment == ExperimentKind::Iho) {
    c.iho.delta = parse_double(key, v);
    return;
  }
  if (key == "experiment.kind") c.experiment = experiment_kind_from_string(v);
  else if (key == "experiment.seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "experiment.realizations") c.realizations = parse_int(key, v);
  else if (key == "experiment.threads") c.threads = parse_int(key, v);
  else if (key == "experiment.stream_offset") c.stream_offset = parse_number<std::uint64_t>(key, v);
  else if (key == "grid.t_max") c.t_max = parse_double(key, v);
  else if (key == "grid.n_points") c.n_points = parse_int(key, v);
  else if (key == "grid.scale_with_g") c.scale_with_g = parse_bool(key, v);
  else if (key == "model.d_a") c.d_a = parse_int(key, v);
  else if (key == "model.d_b") c.d_b = parse_int(key, v);
  else if (key == "model.delta") c.delta = parse_double(key, v);
  else if (key == "model.beta") c.beta = parse_double(key, v);
  else if (key == "model.noise_pairs") c.noise_pairs = parse_int(key, v);
  else if (key == "model.noise_channels") {
    if (v == "traceless") c.noise_channels = NoiseChannels::Traceless;
    else if (v == "all") c.noise_channels = NoiseChannels::All;
    else throw InvalidArgument("config: noise_channels must be 'traceless' or 'all'");
  } else if (key == "model.le_temperature") {
    if (v == "half") c.le_temperature = LeTemperature::Half;
    else if (v == "bare") c.le_temperature = LeTemperature::Bare;
    else throw InvalidArgument("config: le_temperature must be 'half' or 'bare'");
  } else if (key == "model.regularization") {
    if (v == "thermal_circle") c.regularization = Regularization::ThermalCircle;
    else if (v == "unregularized") c.regularization = Regularization::Unregularized;
    else throw InvalidArgument("config: regularization must be 'thermal_circle' or 'unregularized'");
  } else if (key == "syk.n_fermions") c.n_fermions = parse_int(key, v);
  else if (key == "syk.g") c.g = parse_double(key, v);
  else if (key == "syk.probe_a") c.probe_a = parse_int(key, v);
  else if (key == "syk.probe_b") c.probe_b = parse_int(key, v);
  else if (key == "syk.variance_scale") c.variance_scale = parse_double(key, v);
  else if (key == "iho.m1") c.iho.m1 = parse_double(key, v);
  else if (key == "iho.m2") c.iho.m2 = parse_double(key, v);
  else if (key == "iho.omega1") c.iho.omega1 = parse_double(key, v);
  else if (key == "iho.omega2") c.iho.omega2 = parse_double(key, v);
  else if (key == "iho.delta") c.iho.delta = parse_double(key, v);
  else if (key == "iho.inverted1") c.iho.inverted1 = parse_bool(key, v);
  else if (key == "iho.inverted2") c.iho.inverted2 = parse_bool(key, v);
  else if (key == "haar_check.samples") c.haar_samples = parse_list(key, v);
  else if (key == "haar_check.operators") c.haar_operators = parse_int(key, v);
  else if (key == "fit.amplitude_lo") c.fit.amplitude_lo = parse_double(key, v);
  else if (key == "fit.amplitude_hi") c.fit.amplitude_hi = parse_double(key, v);
  else if (key == "fit.growth_lo") c.fit.growth_lo = parse_double(key, v);
  else if (key == "fit.growth_hi") c.fit.growth_hi = parse_double(key, v);
  else if (key == "fit.subtract_plateau") c.fit.subtract_plateau = parse_bool(key, v);
  else if (key == "fit.use_weights") c.fit.use_weights = parse_bool(key, v);
  else if (key == "fit.t_lo" || key == "fit.t_hi") {
    FitWindow w = c.fit.window.value_or(FitWindow{0.0, c.t_max});
    (key == "fit.t_lo" ? w.t_lo : w.t_hi) = parse_double(key, v);
    c.fit.window = w;
  } else if (key == "fit.sweep_model") {
    if (v != "auto" && v != "exponential" && v != "gaussian" && v != "early_growth")
      throw InvalidArgument("config: sweep_model must be auto, exponential, gaussian or early_growth");
    c.sweep_model = v;
  } else if (key == "output.dir") c.output_dir = v;
  else throw InvalidArgument("config: unknown key '" + raw_key + "'");
}

namespace {

ExperimentConfig from_ptree(const boost::property_tree::ptree& tree) {
  ExperimentConfig c;
  // The kind decides how shared keys such as delta are routed, so read it first.
  if (auto kind = tree.get_optional<std::string>("experiment.kind"))
    c.experiment = experiment_kind_from_string(trim(*kind));
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw InvalidArgument("config: key '" + section + "' must sit in a section");
    for (const auto& [key, value] : body) {
      set_config_value(c, section + "." + key, value.data());
    }
  }
  return c;
}

}  // namespace

ExperimentConfig load_config_string(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return from_ptree(tree);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config_string(buf.str());
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("config: " + m); };
  if (!(t_max > 0.0)) fail("t_max must be positive");
  if (scale_with_g && experiment != ExperimentKind::Syk) fail("grid.scale_with_g applies to syk only");
  if (n_points < 2 || n_points > 1000000) fail("n_points must lie in [2, 1e6]");
  if (realizations < 1) fail("realizations must be positive");
  if (threads < 1 || threads > 256) fail("threads must lie in [1, 256]");
  if (!(beta >= 0.0)) fail("beta must be nonnegative");
  if (!(delta >= 0.0)) fail("delta must be nonnegative");
  if (noise_pairs < 0) fail("noise_pairs must be nonnegative");
  if (!(fit.amplitude_lo > 0.0 && fit.amplitude_lo < fit.amplitude_hi && fit.amplitude_hi <= 1.0))
    fail("fit amplitudes must satisfy 0 < amplitude_lo < amplitude_hi <= 1");
  if (!(fit.growth_lo > 0.0 && fit.growth_lo < fit.growth_hi && fit.growth_hi < 1.0))
    fail("fit growth window must satisfy 0 < growth_lo < growth_hi < 1");
  if (fit.window && !(fit.window->t_lo < fit.window->t_hi)) fail("fit window needs t_lo < t_hi");
  switch (experiment) {
    case ExperimentKind::RmtOtocLe:
    case ExperimentKind::FiniteTemp:
      if (d_a != 2) fail("the bipartite model fixes d_a = 2 (Pauli couplings)");
      if (d_b < 2 || d_b > 2048) fail("d_b must lie in [2, 2048]");
      break;
    case ExperimentKind::Syk:
      if (n_fermions < 4 || n_fermions > kMaxDenseFermions) fail("n_fermions must lie in [4, 14]");
      if (!(g > 0.0 && g <= 1.0)) fail("g must lie in (0, 1]");
      if (!(variance_scale > 0.0)) fail("variance_scale must be positive");
      if (probe_a == probe_b || probe_a < 0 || probe_b < 0 || probe_a >= n_fermions ||
          probe_b >= n_fermions)
        fail("probe sites must be distinct and within [0, n_fermions)");
      break;
    case ExperimentKind::Iho:
      iho.validate();
      break;
    case ExperimentKind::HaarCheck:
      if (d_a < 1 || d_b < 1 || d_a * d_b > 256) fail("haar_check needs 1 <= d_a d_b <= 256");
      if (haar_operators < 1) fail("haar_check operators must be positive");
      if (haar_samples.size() < 2) fail("haar_check needs at least two sample counts");
      for (std::size_t i = 0; i < haar_samples.size(); ++i)
        if (haar_samples[i] < 1 || (i > 0 && haar_samples[i] <= haar_samples[i - 1]))
          fail("haar_check sample counts must be positive and ascending");
      break;
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = to_string(experiment);
  j["grid"] = {{"t_max", t_max}, {"n_points", n_points}, {"scale_with_g", scale_with_g}};
  j["run"] = {{"realizations", realizations}, {"seed", seed}, {"stream_offset", stream_offset}};
  switch (experiment) {
    case ExperimentKind::RmtOtocLe:
    case ExperimentKind::FiniteTemp:
      j["model"] = {{"d_a", d_a},
                    {"d_b", d_b},
                    {"delta", delta},
                    {"beta", beta},
                    {"noise_channels", noise_channels == NoiseChannels::Traceless ? "traceless" : "all"},
                    {"le_temperature", le_temperature == LeTemperature::Half ? "half" : "bare"},
                    {"regularization", regularization == Regularization::ThermalCircle
                                           ? "thermal_circle"
                                           : "unregularized"},
                    {"noise_pairs", noise_pairs}};
      break;
    case ExperimentKind::Syk:
      j["model"] = {{"beta", beta}};
      j["syk"] = {{"n_fermions", n_fermions}, {"g", g}, {"probe_a", probe_a},
                  {"probe_b", probe_b}, {"variance_scale", variance_scale}};
      break;
    case ExperimentKind::Iho:
      j["iho"] = {{"m1", iho.m1}, {"m2", iho.m2}, {"omega1", iho.omega1},
                  {"omega2", iho.omega2}, {"delta", iho.delta}, {"inverted1", iho.inverted1},
                  {"inverted2", iho.inverted2}};
      break;
    case ExperimentKind::HaarCheck:
      j["model"] = {{"d_a", d_a}, {"d_b", d_b}};
      j["haar_check"] = {{"samples", haar_samples}, {"operators", haar_operators}};
      break;
  }
  j["fit"] = {{"amplitude_lo", fit.amplitude_lo}, {"amplitude_hi", fit.amplitude_hi},
              {"growth_lo", fit.growth_lo},       {"growth_hi", fit.growth_hi},
              {"subtract_plateau", fit.subtract_plateau},
              {"use_weights", fit.use_weights},   {"plateau_tail_fraction", kPlateauTailFraction},
              {"sweep_model", sweep_model}};
  if (fit.window) j["fit"]["window"] = {fit.window->t_lo, fit.window->t_hi};
  return j;
}

std::string ExperimentConfig::hash() const {
  // 64-bit FNV-1a over the canonical JSON text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::string default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "results";
}

TimeGrid ExperimentConfig::grid() const {
  // Weak probe couplings slow the decay like 1/g^2, so a sweep can keep the window fixed.
  const double scale = scale_with_g ? 1.0 / (g * g) : 1.0;
  return TimeGrid::uniform(t_max * scale, n_points);
}

}  // namespace echolab
