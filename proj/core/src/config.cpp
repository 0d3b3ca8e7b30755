#include "qrf/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qrf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a number: '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not an integer: '" + v + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

ToolConfig parse_config(const std::string& text) {
  ToolConfig cfg;
  ScenarioConfig& sc = cfg.scenario;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> schema = {
      {"seed", [&](const std::string& k, const std::string& v) {
         sc.master_seed = static_cast<std::uint64_t>(parse_int(k, v));
       }},
      {"fingerprint.seed", [&](const std::string& k, const std::string& v) {
         sc.fingerprint_seed = static_cast<std::uint64_t>(parse_int(k, v));
       }},
      {"fingerprint.length", [&](const std::string& k, const std::string& v) {
         sc.fingerprint.length = static_cast<int>(parse_int(k, v));
       }},
      {"fingerprint.resonances", [&](const std::string& k, const std::string& v) {
         // "freq:damping,freq:damping,..."
         sc.fingerprint.resonances.clear();
         for (const auto& item : split(v, ',')) {
           const auto parts = split(item, ':');
           if (parts.size() != 2)
             throw ConfigError("config: key '" + k + "': expected freq:damping, got '" + item + "'");
           Resonance r;
           r.frequency_hz = parse_double(k, parts[0]);
           r.damping = parse_double(k, parts[1]);
           sc.fingerprint.resonances.push_back(r);
         }
       }},
      {"record.sample_rate", [&](const std::string& k, const std::string& v) {
         sc.fingerprint.sample_rate = parse_double(k, v);
       }},
      {"record.raw_samples", [&](const std::string& k, const std::string& v) {
         sc.raw_samples = static_cast<int>(parse_int(k, v));
       }},
      {"record.excised_samples", [&](const std::string& k, const std::string& v) {
         sc.excised_samples = static_cast<int>(parse_int(k, v));
       }},
      {"scenario.rho", [&](const std::string& k, const std::string& v) {
         sc.rho = parse_double(k, v);
       }},
      {"scenario.snr_db", [&](const std::string& k, const std::string& v) {
         sc.snr_db = parse_double(k, v);
       }},
      {"scenario.shielding_db", [&](const std::string& k, const std::string& v) {
         sc.shielding_db = parse_double(k, v);
       }},
      {"scenario.jammer_sigma", [&](const std::string& k, const std::string& v) {
         sc.jammer_sigma = parse_double(k, v);
       }},
      {"scenario.waveforms_per_detector", [&](const std::string& k, const std::string& v) {
         sc.waveforms_per_detector = static_cast<int>(parse_int(k, v));
       }},
      {"scenario.train_fraction", [&](const std::string& k, const std::string& v) {
         sc.train_fraction = parse_double(k, v);
       }},
      {"scenario.alignment_tolerance", [&](const std::string& k, const std::string& v) {
         sc.alignment_tolerance = static_cast<int>(parse_int(k, v));
       }},
      {"pulse.peak_current", [&](const std::string& k, const std::string& v) {
         sc.pulse.peak_current = parse_double(k, v);
       }},
      {"pulse.decay_tau", [&](const std::string& k, const std::string& v) {
         sc.pulse.decay_tau = parse_double(k, v);
       }},
      {"pulse.gauss_sigma", [&](const std::string& k, const std::string& v) {
         sc.pulse.gauss_sigma = parse_double(k, v);
       }},
      {"pulse.onset", [&](const std::string& k, const std::string& v) {
         sc.pulse.onset = parse_double(k, v);
       }},
      {"pulse.t_rise", [&](const std::string& k, const std::string& v) {
         sc.pulse.t_rise = parse_double(k, v);
       }},
      {"pulse.t_fall", [&](const std::string& k, const std::string& v) {
         sc.pulse.t_fall = parse_double(k, v);
       }},
      {"noise.thermal_sigma", [&](const std::string& k, const std::string& v) {
         sc.noise.thermal_sigma = parse_double(k, v);
       }},
      {"noise.digitizer_bits", [&](const std::string& k, const std::string& v) {
         sc.noise.digitizer_bits = static_cast<int>(parse_int(k, v));
       }},
      {"noise.full_scale", [&](const std::string& k, const std::string& v) {
         sc.noise.full_scale = parse_double(k, v);
       }},
      {"band.f_low", [&](const std::string& k, const std::string& v) {
         sc.band.f_low = parse_double(k, v);
       }},
      {"band.f_high", [&](const std::string& k, const std::string& v) {
         sc.band.f_high = parse_double(k, v);
       }},
      {"mlp.hidden", [&](const std::string& k, const std::string& v) {
         sc.hidden_dims.clear();
         for (const auto& item : split(v, ','))
           sc.hidden_dims.push_back(static_cast<int>(parse_int(k, item)));
       }},
      {"train.learning_rate", [&](const std::string& k, const std::string& v) {
         sc.train_cfg.learning_rate = parse_double(k, v);
       }},
      {"train.epochs", [&](const std::string& k, const std::string& v) {
         sc.train_cfg.epochs = static_cast<int>(parse_int(k, v));
       }},
      {"train.batch_size", [&](const std::string& k, const std::string& v) {
         sc.train_cfg.batch_size = static_cast<int>(parse_int(k, v));
       }},
      {"train.patience", [&](const std::string& k, const std::string& v) {
         sc.train_cfg.patience = static_cast<int>(parse_int(k, v));
       }},
      {"train.optimizer", [&](const std::string& k, const std::string& v) {
         if (v == "gd")
           sc.train_cfg.optimizer = Optimizer::kGradientDescent;
         else if (v == "adam")
           sc.train_cfg.optimizer = Optimizer::kAdaptiveMoment;
         else
           throw ConfigError("config: key '" + k + "': expected gd or adam, got '" + v + "'");
       }},
      {"session.photons", [&](const std::string& k, const std::string& v) {
         sc.session_length = static_cast<int>(parse_int(k, v));
       }},
      {"session.efficiency", [&](const std::string& k, const std::string& v) {
         sc.detector_efficiency = parse_double(k, v);
       }},
      {"antenna.positions", [&](const std::string& k, const std::string& v) {
         sc.antenna_positions.clear();
         for (const auto& item : split(v, ','))
           sc.antenna_positions.push_back(parse_double(k, item));
       }},
      {"antenna.reference_distance", [&](const std::string& k, const std::string& v) {
         sc.reference_distance = parse_double(k, v);
       }},
      {"sweep.parameter", [&](const std::string& k, const std::string& v) {
         if (v == "rho")
           cfg.sweep_parameter = SweepParameter::kRho;
         else if (v == "shielding_db")
           cfg.sweep_parameter = SweepParameter::kShieldingDb;
         else if (v == "jammer_sigma")
           cfg.sweep_parameter = SweepParameter::kJammerSigma;
         else
           throw ConfigError("config: key '" + k +
                             "': expected rho|shielding_db|jammer_sigma, got '" + v + "'");
       }},
      {"sweep.values", [&](const std::string& k, const std::string& v) {
         cfg.sweep_values.clear();
         for (const auto& item : split(v, ',')) cfg.sweep_values.push_back(parse_double(k, item));
       }},
      {"sweep.trials", [&](const std::string& k, const std::string& v) {
         cfg.sweep_trials = static_cast<int>(parse_int(k, v));
       }},
      {"sweep.intercept", [&](const std::string& k, const std::string& v) {
         cfg.sweep_intercept = parse_int(k, v) != 0;
       }},
      {"bell.alpha", [&](const std::string& k, const std::string& v) {
         cfg.bell_settings_deg[0] = parse_double(k, v);
       }},
      {"bell.alpha_prime", [&](const std::string& k, const std::string& v) {
         cfg.bell_settings_deg[1] = parse_double(k, v);
       }},
      {"bell.beta", [&](const std::string& k, const std::string& v) {
         cfg.bell_settings_deg[2] = parse_double(k, v);
       }},
      {"bell.beta_prime", [&](const std::string& k, const std::string& v) {
         cfg.bell_settings_deg[3] = parse_double(k, v);
       }},
      {"bell.pairs", [&](const std::string& k, const std::string& v) {
         cfg.bell_pairs = parse_int(k, v);
       }},
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = schema.find(key);
    if (it == schema.end())
      throw ConfigError("config: line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, value);
  }

  // Range checks with key paths, beyond what module validation reports.
  if (!(sc.band.f_low < sc.band.f_high))
    throw ConfigError("config: band.f_low must be < band.f_high");
  try {
    sc.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_string(const ToolConfig& cfg) {
  const ScenarioConfig& sc = cfg.scenario;
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "seed = " << sc.master_seed << "\n";
  out << "fingerprint.seed = " << sc.fingerprint_seed << "\n";
  out << "fingerprint.length = " << sc.fingerprint.length << "\n";
  out << "fingerprint.resonances = ";
  for (std::size_t i = 0; i < sc.fingerprint.resonances.size(); ++i) {
    const auto& r = sc.fingerprint.resonances[i];
    out << (i ? "," : "") << num(r.frequency_hz) << ":" << num(r.damping);
  }
  out << "\n";
  out << "record.sample_rate = " << num(sc.fingerprint.sample_rate) << "\n";
  out << "record.raw_samples = " << sc.raw_samples << "\n";
  out << "record.excised_samples = " << sc.excised_samples << "\n";
  out << "scenario.rho = " << num(sc.rho) << "\n";
  out << "scenario.snr_db = " << num(sc.snr_db) << "\n";
  out << "scenario.shielding_db = " << num(sc.shielding_db) << "\n";
  out << "scenario.jammer_sigma = " << num(sc.jammer_sigma) << "\n";
  out << "scenario.waveforms_per_detector = " << sc.waveforms_per_detector << "\n";
  out << "scenario.train_fraction = " << num(sc.train_fraction) << "\n";
  out << "scenario.alignment_tolerance = " << sc.alignment_tolerance << "\n";
  out << "pulse.peak_current = " << num(sc.pulse.peak_current) << "\n";
  out << "pulse.decay_tau = " << num(sc.pulse.decay_tau) << "\n";
  out << "pulse.gauss_sigma = " << num(sc.pulse.gauss_sigma) << "\n";
  out << "pulse.onset = " << num(sc.pulse.onset) << "\n";
  out << "pulse.t_rise = " << num(sc.pulse.t_rise) << "\n";
  out << "pulse.t_fall = " << num(sc.pulse.t_fall) << "\n";
  out << "noise.thermal_sigma = " << num(sc.noise.thermal_sigma) << "\n";
  out << "noise.digitizer_bits = " << sc.noise.digitizer_bits << "\n";
  out << "noise.full_scale = " << num(sc.noise.full_scale) << "\n";
  out << "band.f_low = " << num(sc.band.f_low) << "\n";
  out << "band.f_high = " << num(sc.band.f_high) << "\n";
  out << "mlp.hidden = ";
  for (std::size_t i = 0; i < sc.hidden_dims.size(); ++i)
    out << (i ? "," : "") << sc.hidden_dims[i];
  out << "\n";
  out << "train.learning_rate = " << num(sc.train_cfg.learning_rate) << "\n";
  out << "train.epochs = " << sc.train_cfg.epochs << "\n";
  out << "train.batch_size = " << sc.train_cfg.batch_size << "\n";
  out << "train.patience = " << sc.train_cfg.patience << "\n";
  out << "train.optimizer = "
      << (sc.train_cfg.optimizer == Optimizer::kGradientDescent ? "gd" : "adam") << "\n";
  out << "session.photons = " << sc.session_length << "\n";
  out << "session.efficiency = " << num(sc.detector_efficiency) << "\n";
  out << "antenna.positions = ";
  for (std::size_t i = 0; i < sc.antenna_positions.size(); ++i)
    out << (i ? "," : "") << num(sc.antenna_positions[i]);
  out << "\n";
  out << "antenna.reference_distance = " << num(sc.reference_distance) << "\n";
  out << "sweep.parameter = "
      << (cfg.sweep_parameter == SweepParameter::kRho ? "rho"
          : cfg.sweep_parameter == SweepParameter::kShieldingDb ? "shielding_db"
                                                                : "jammer_sigma")
      << "\n";
  if (!cfg.sweep_values.empty()) {
    out << "sweep.values = ";
    for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i)
      out << (i ? "," : "") << num(cfg.sweep_values[i]);
    out << "\n";
  }
  out << "sweep.trials = " << cfg.sweep_trials << "\n";
  out << "sweep.intercept = " << (cfg.sweep_intercept ? 1 : 0) << "\n";
  out << "bell.alpha = " << num(cfg.bell_settings_deg[0]) << "\n";
  out << "bell.alpha_prime = " << num(cfg.bell_settings_deg[1]) << "\n";
  out << "bell.beta = " << num(cfg.bell_settings_deg[2]) << "\n";
  out << "bell.beta_prime = " << num(cfg.bell_settings_deg[3]) << "\n";
  out << "bell.pairs = " << cfg.bell_pairs << "\n";
  return out.str();
}

void save_config(const ToolConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write file: " + path);
  out << config_to_string(cfg);
}

}  // namespace qrf
