#include "raman/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "raman/error.hpp"
#include "raman/spectra.hpp"

namespace raman {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Removes a trailing comment, ignoring '#' inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& tok, const std::string& source, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty()) throw ParseError(source, line, "invalid value '" + tok + "'");
  return v;
}

ConfigValue parse_value(const std::string& raw, const std::string& source, int line) {
  const std::string v = trim(raw);
  if (v.empty()) throw ParseError(source, line, "missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ParseError(source, line, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ParseError(source, line, "unterminated array");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse_number(item, source, line));
    }
    return out;
  }
  return parse_number(v, source, line);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Applier {
 public:
  Applier(const ConfigTable& table, const std::string& source) : table_(table), source_(source) {}

  void number(const std::string& key, double& target) {
    if (const ConfigValue* v = find(key)) target = as_number(key, *v);
  }
  void integer(const std::string& key, int& target) {
    if (const ConfigValue* v = find(key)) {
      const double d = as_number(key, *v);
      if (d != std::floor(d)) fail(key, "expected an integer");
      target = static_cast<int>(d);
    }
  }
  void boolean(const std::string& key, bool& target) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<bool>(*v)) fail(key, "expected true or false");
      target = std::get<bool>(*v);
    }
  }
  void string(const std::string& key, std::string& target) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<std::string>(*v)) fail(key, "expected a quoted string");
      target = std::get<std::string>(*v);
    }
  }
  void array(const std::string& key, std::vector<double>& target) {
    if (const ConfigValue* v = find(key)) {
      if (!std::holds_alternative<std::vector<double>>(*v)) fail(key, "expected an array");
      target = std::get<std::vector<double>>(*v);
    }
  }
  bool has(const std::string& key) const { return table_.values.count(key) > 0; }

  void reject_unknown() const {
    for (const auto& [key, value] : table_.values)
      if (!used_.count(key))
        throw ConfigError(source_ + ":" + std::to_string(table_.lines.at(key)) + ": unknown key '" +
                          key + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(table_.lines.at(key)) + ": " + key + ": " + what);
  }

 private:
  const ConfigValue* find(const std::string& key) {
    used_.insert({key, true});
    const auto it = table_.values.find(key);
    return it == table_.values.end() ? nullptr : &it->second;
  }
  double as_number(const std::string& key, const ConfigValue& v) const {
    if (!std::holds_alternative<double>(v)) fail(key, "expected a number");
    return std::get<double>(v);
  }

  const ConfigTable& table_;
  std::string source_;
  std::map<std::string, bool> used_;
};

}  // namespace

ConfigTable parse_config_table(const std::string& text, const std::string& source) {
  ConfigTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(source, lineno, "malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) throw ParseError(source, lineno, "empty section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ParseError(source, lineno, "missing key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.values.count(full)) throw ParseError(source, lineno, "duplicate key '" + full + "'");
    table.values[full] = parse_value(body.substr(eq + 1), source, lineno);
    table.lines[full] = lineno;
  }
  return table;
}

std::vector<double> RunConfig::default_delays() { return uniform_grid(0.3, 10.0, 0.1); }

void RunConfig::validate() const {
  try {
    system.validate();
    detectors.validate();
    integrator.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  for (int d : dims)
    if (d < 2) throw ConfigError("truncation dims must be >= 2");
  if (delays_ps.empty()) throw ConfigError("sweep: no delays");
  const double min_delay = -kPulseWindowSigmas * (system.write.sigma_ps - system.read.sigma_ps);
  for (double dt : delays_ps)
    if (!(dt >= min_delay) || !std::isfinite(dt))
      throw ConfigError("sweep: delay " + std::to_string(dt) + " ps puts the read window before the write window");
  if (!(herald.step_ps > 0.0) || !(herald.stop_ps >= herald.start_ps) || herald.start_ps < 0.0)
    throw ConfigError("herald: need 0 <= start_ps <= stop_ps and step_ps > 0");
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  const ConfigTable table = parse_config_table(text, source);
  Applier a(table, source);
  RunConfig c;
  SystemParams& s = c.system;

  a.number("system.lambda_write_stokes_per_ps", s.lambda_write_stokes);
  a.number("system.lambda_read_antistokes_per_ps", s.lambda_read_antistokes);
  a.number("system.lambda_fwm_per_ps", s.lambda_fwm);
  a.number("system.theta_rad", s.theta);
  a.number("system.theta_split_rad", s.theta_split);
  a.number("system.n_th", s.n_th);
  double beta1 = s.phonons[0].beta;
  a.number("system.beta1", beta1);
  if (!(beta1 >= 0.0 && beta1 <= 1.0)) a.fail("system.beta1", "must lie in [0, 1]");
  s.phonons[0].beta = beta1;
  s.phonons[1].beta = std::sqrt(1.0 - beta1 * beta1);
  double tau1 = s.phonons[0].tau_ps(), tau2 = s.phonons[1].tau_ps();
  a.number("system.tau1_ps", tau1);
  a.number("system.tau2_ps", tau2);
  if (!(tau1 > 0.0)) a.fail("system.tau1_ps", "must be > 0");
  if (!(tau2 > 0.0)) a.fail("system.tau2_ps", "must be > 0");
  s.phonons[0].kappa = 1.0 / tau1;
  s.phonons[1].kappa = 1.0 / tau2;
  double beat_ghz = 1000.0 * (s.phonons[0].delta - s.phonons[1].delta) / (2.0 * std::numbers::pi);
  a.number("system.beat_ghz", beat_ghz);
  s.phonons[0].delta = std::numbers::pi * beat_ghz / 1000.0;
  s.phonons[1].delta = -s.phonons[0].delta;
  a.number("system.delta1_rad_per_ps", s.phonons[0].delta);
  a.number("system.delta2_rad_per_ps", s.phonons[1].delta);
  a.number("system.delta_stokes_rad_per_ps", s.delta_stokes);
  a.number("system.delta_antistokes_rad_per_ps", s.delta_antistokes);
  a.number("system.sigma_write_ps", s.write.sigma_ps);
  a.number("system.sigma_read_ps", s.read.sigma_ps);

  a.number("detectors.eta_stokes", c.detectors.eta_stokes);
  a.number("detectors.eta_antistokes", c.detectors.eta_antistokes);
  a.number("detectors.pdc_stokes", c.detectors.pdc_stokes);
  a.number("detectors.pdc_antistokes", c.detectors.pdc_antistokes);

  if (a.has("sweep.delays_ps")) {
    a.array("sweep.delays_ps", c.delays_ps);
    for (const char* k : {"sweep.start_ps", "sweep.stop_ps", "sweep.step_ps"})
      if (a.has(k)) a.fail(k, "cannot be combined with sweep.delays_ps");
  } else {
    double start = 0.3, stop = 10.0, step = 0.1;
    a.number("sweep.start_ps", start);
    a.number("sweep.stop_ps", stop);
    a.number("sweep.step_ps", step);
    if (!(step > 0.0) || !(stop > start)) throw ConfigError("sweep: need stop_ps > start_ps and step_ps > 0");
    c.delays_ps = uniform_grid(start, stop, step);
  }

  a.number("herald.start_ps", c.herald.start_ps);
  a.number("herald.stop_ps", c.herald.stop_ps);
  a.number("herald.step_ps", c.herald.step_ps);

  std::string method = c.integrator.method == IntegrationMethod::rk4 ? "rk4" : "adaptive";
  a.string("integrator.method", method);
  if (method == "rk4")
    c.integrator.method = IntegrationMethod::rk4;
  else if (method == "adaptive")
    c.integrator.method = IntegrationMethod::adaptive;
  else
    a.fail("integrator.method", "expected \"adaptive\" or \"rk4\"");
  a.number("integrator.rel_tol", c.integrator.rel_tol);
  a.number("integrator.abs_tol", c.integrator.abs_tol);
  a.number("integrator.max_step_ps", c.integrator.max_step_ps);
  a.number("integrator.fixed_step_ps", c.integrator.fixed_step_ps);
  a.boolean("integrator.analytic_gaps", c.integrator.analytic_gaps);

  if (a.has("truncation.dims")) {
    std::vector<double> dims;
    a.array("truncation.dims", dims);
    if (dims.size() != 4) a.fail("truncation.dims", "expected 4 entries (b1, b2, a_S, a_A)");
    for (std::size_t k = 0; k < 4; ++k) {
      if (dims[k] != std::floor(dims[k])) a.fail("truncation.dims", "entries must be integers");
      c.dims[k] = static_cast<int>(dims[k]);
    }
  }
  if (a.has("truncation.dim")) {
    int d = 3;
    a.integer("truncation.dim", d);
    c.dims = {d, d, d, d};
  }

  std::string dir = c.output.dir.string();
  a.string("output.dir", dir);
  c.output.dir = dir;
  a.boolean("output.svg", c.output.svg);

  a.reject_unknown();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path), path.string());
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  const SystemParams& s = c.system;
  os << "[system]\n"
     << "lambda_write_stokes_per_ps = " << s.lambda_write_stokes << "\n"
     << "lambda_read_antistokes_per_ps = " << s.lambda_read_antistokes << "\n"
     << "lambda_fwm_per_ps = " << s.lambda_fwm << "\n"
     << "theta_rad = " << s.theta << "\n"
     << "theta_split_rad = " << s.theta_split << "\n"
     << "n_th = " << s.n_th << "\n"
     << "beta1 = " << s.phonons[0].beta << "\n"
     << "tau1_ps = " << s.phonons[0].tau_ps() << "\n"
     << "tau2_ps = " << s.phonons[1].tau_ps() << "\n"
     << "delta1_rad_per_ps = " << s.phonons[0].delta << "\n"
     << "delta2_rad_per_ps = " << s.phonons[1].delta << "\n"
     << "delta_stokes_rad_per_ps = " << s.delta_stokes << "\n"
     << "delta_antistokes_rad_per_ps = " << s.delta_antistokes << "\n"
     << "sigma_write_ps = " << s.write.sigma_ps << "\n"
     << "sigma_read_ps = " << s.read.sigma_ps << "\n\n";
  os << "[detectors]\n"
     << "eta_stokes = " << c.detectors.eta_stokes << "\n"
     << "eta_antistokes = " << c.detectors.eta_antistokes << "\n"
     << "pdc_stokes = " << c.detectors.pdc_stokes << "\n"
     << "pdc_antistokes = " << c.detectors.pdc_antistokes << "\n\n";
  os << "[sweep]\ndelays_ps = [";
  for (std::size_t i = 0; i < c.delays_ps.size(); ++i) os << (i ? ", " : "") << c.delays_ps[i];
  os << "]\n\n";
  os << "[herald]\n"
     << "start_ps = " << c.herald.start_ps << "\n"
     << "stop_ps = " << c.herald.stop_ps << "\n"
     << "step_ps = " << c.herald.step_ps << "\n\n";
  os << "[integrator]\n"
     << "method = \"" << (c.integrator.method == IntegrationMethod::rk4 ? "rk4" : "adaptive") << "\"\n"
     << "rel_tol = " << c.integrator.rel_tol << "\n"
     << "abs_tol = " << c.integrator.abs_tol << "\n"
     << "max_step_ps = " << c.integrator.max_step_ps << "\n"
     << "fixed_step_ps = " << c.integrator.fixed_step_ps << "\n"
     << "analytic_gaps = " << (c.integrator.analytic_gaps ? "true" : "false") << "\n\n";
  os << "[truncation]\ndims = [" << c.dims[0] << ", " << c.dims[1] << ", " << c.dims[2] << ", "
     << c.dims[3] << "]\n\n";
  os << "[output]\ndir = \"" << c.output.dir.string() << "\"\nsvg = "
     << (c.output.svg ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace raman
