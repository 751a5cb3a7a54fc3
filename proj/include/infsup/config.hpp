#ifndef INFSUP_CONFIG_HPP
#define INFSUP_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/trainer.hpp"

namespace infsup {

/// Everything one experiment needs, in a flat sectioned key-value file.
/// parse(serialize(cfg)) reproduces the configuration exactly.
struct RunConfig {
  // [problem]
  std::string problem = "poisson";
  int dim = 3;
  int m = 2;  // exponent of the quasilinear flux
  // [network]
  std::vector<int> u_hidden{40, 40};
  std::vector<int> v_hidden;  // empty mirrors the trial network
  // [train]
  TrainConfig train;
  // [output]
  std::string out_dir;  // empty: resolved by the caller (flag, env, "out")
  int checkpoint_interval = 0;  // 0 writes final checkpoints only
  int slice_axis1 = 0;
  int slice_axis2 = 1;
  int slice_n = 41;
  double slice_fixed = 0.0;
  double fd_h = 1.0 / 128;  // reference grid spacing for lshape/mixed

  std::vector<int> u_arch(int d) const {
    std::vector<int> arch{d};
    arch.insert(arch.end(), u_hidden.begin(), u_hidden.end());
    arch.push_back(1);
    return arch;
  }
  std::vector<int> v_arch(int d) const {
    if (v_hidden.empty()) return u_arch(d);
    std::vector<int> arch{d};
    arch.insert(arch.end(), v_hidden.begin(), v_hidden.end());
    arch.push_back(1);
    return arch;
  }

  std::string serialize() const {
    std::ostringstream o;
    o.precision(17);
    o << "[problem]\n";
    o << "name = " << problem << "\n";
    o << "dim = " << dim << "\n";
    o << "m = " << m << "\n\n";
    o << "[network]\n";
    o << "u_hidden =";
    for (int w : u_hidden) o << ' ' << w;
    o << "\n";
    o << "v_hidden =";
    for (int w : v_hidden) o << ' ' << w;
    o << "\n\n";
    o << "[train]\n";
    o << "interior = " << train.n_interior << "\n";
    o << "boundary = " << train.n_boundary << "\n";
    o << "iters = " << train.iters << "\n";
    o << "ascent_steps = " << train.ascent_steps << "\n";
    o << "descent_steps = " << train.descent_steps << "\n";
    o << "resample_every = " << train.resample_every << "\n";
    o << "lr = " << train.lr << "\n";
    o << "lr_decay = " << train.lr_decay << "\n";
    o << "lr_step = " << train.lr_step << "\n";
    o << "rms_decay = " << train.rms_decay << "\n";
    o << "rms_eps = " << train.rms_eps << "\n";
    o << "seed = " << train.seed << "\n";
    o << "test_points = " << train.test_points << "\n";
    o << "chunk = " << train.chunk << "\n";
    o << "threads = " << train.threads << "\n\n";
    o << "[output]\n";
    o << "dir = " << out_dir << "\n";
    o << "checkpoint_interval = " << checkpoint_interval << "\n";
    o << "slice_axis1 = " << slice_axis1 << "\n";
    o << "slice_axis2 = " << slice_axis2 << "\n";
    o << "slice_n = " << slice_n << "\n";
    o << "slice_fixed = " << slice_fixed << "\n";
    o << "fd_h = " << fd_h << "\n";
    return o.str();
  }

  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    cfg.u_hidden.clear();
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail("unterminated section header");
        section = line.substr(1, line.size() - 2);
        if (section != "problem" && section != "network" &&
            section != "train" && section != "output")
          fail("unknown section '" + section + "'");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail("expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (section.empty()) fail("key outside of any section");
      try {
        if (!cfg.assign(section, key, value))
          fail("unknown key '" + key + "' in [" + section + "]");
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception&) {
        fail("cannot parse value '" + value + "' for key '" + key + "'");
      }
    }
    if (cfg.u_hidden.empty()) cfg.u_hidden = {40, 40};
    return cfg;
  }

  static RunConfig parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str());
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::istringstream in(v);
    int w;
    while (in >> w) out.push_back(w);
    return out;
  }

  bool assign(const std::string& sec, const std::string& key,
              const std::string& value) {
    if (sec == "problem") {
      if (key == "name") return problem = value, true;
      if (key == "dim") return dim = std::stoi(value), true;
      if (key == "m") return m = std::stoi(value), true;
      return false;
    }
    if (sec == "network") {
      if (key == "u_hidden") return u_hidden = parse_int_list(value), true;
      if (key == "v_hidden") return v_hidden = parse_int_list(value), true;
      return false;
    }
    if (sec == "train") {
      if (key == "interior") return train.n_interior = std::stoi(value), true;
      if (key == "boundary") return train.n_boundary = std::stoi(value), true;
      if (key == "iters") return train.iters = std::stoi(value), true;
      if (key == "ascent_steps")
        return train.ascent_steps = std::stoi(value), true;
      if (key == "descent_steps")
        return train.descent_steps = std::stoi(value), true;
      if (key == "resample_every")
        return train.resample_every = std::stoi(value), true;
      if (key == "lr") return train.lr = std::stod(value), true;
      if (key == "lr_decay") return train.lr_decay = std::stod(value), true;
      if (key == "lr_step") return train.lr_step = std::stoi(value), true;
      if (key == "rms_decay") return train.rms_decay = std::stod(value), true;
      if (key == "rms_eps") return train.rms_eps = std::stod(value), true;
      if (key == "seed") return train.seed = std::stoull(value), true;
      if (key == "test_points")
        return train.test_points = std::stoi(value), true;
      if (key == "chunk") return train.chunk = std::stoi(value), true;
      if (key == "threads") return train.threads = std::stoi(value), true;
      return false;
    }
    if (sec == "output") {
      if (key == "dir") return out_dir = value, true;
      if (key == "checkpoint_interval")
        return checkpoint_interval = std::stoi(value), true;
      if (key == "slice_axis1") return slice_axis1 = std::stoi(value), true;
      if (key == "slice_axis2") return slice_axis2 = std::stoi(value), true;
      if (key == "slice_n") return slice_n = std::stoi(value), true;
      if (key == "slice_fixed") return slice_fixed = std::stod(value), true;
      if (key == "fd_h") return fd_h = std::stod(value), true;
      return false;
    }
    return false;
  }
};

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.serialize() == b.serialize();
}

// ---------------------------------------------------------------------------
// Presets for the published experiments.

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names = {
      "poisson_d5", "poisson_d5_small", "lshape", "mixed",
      "varcoeff_d5", "quasilinear_d5",
      "table1_n2500", "table1_n5000", "table1_n7500", "table1_n10000"};
  for (int w : {10, 20, 40})
    for (int depth : {1, 2, 3})
      names.push_back("table2_w" + std::to_string(w) + "_d" +
                      std::to_string(depth));
  return names;
}

inline RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.train.seed = 1;

  auto d3_common = [&] {
    cfg.problem = "poisson";
    cfg.dim = 3;
    cfg.train.lr = 1e-3;
    cfg.train.lr_decay = 0.5;
    cfg.train.lr_step = 5000;
    cfg.train.iters = 20000;
    cfg.train.test_points = 2000;
    cfg.slice_axis1 = 0;
    cfg.slice_axis2 = 1;
  };

  if (name == "poisson_d5" || name == "poisson_d5_small") {
    cfg.problem = "poisson";
    cfg.dim = 5;
    const int width = name == "poisson_d5" ? 100 : 60;
    cfg.u_hidden.assign(4, width);
    cfg.train.n_interior = name == "poisson_d5" ? 6000 : 5000;
    cfg.train.n_boundary = 1000;
    cfg.train.iters = 20000;
    cfg.train.lr = 5e-4;
    cfg.train.lr_decay = 0.5;
    cfg.train.lr_step = 2000;
    cfg.train.test_points = 4000;
    cfg.slice_axis1 = 1;  // plot slice over x2, x4 with the rest at 0
    cfg.slice_axis2 = 3;
    return cfg;
  }
  if (name == "lshape") {
    cfg.problem = "lshape";
    cfg.dim = 2;
    cfg.u_hidden.assign(4, 40);
    cfg.train.n_interior = 5000;
    cfg.train.n_boundary = 600;
    cfg.train.iters = 20000;
    cfg.train.lr = 1e-3;
    cfg.train.lr_decay = 0.5;
    cfg.train.lr_step = 5000;
    cfg.train.test_points = 4000;
    cfg.slice_n = 81;
    return cfg;
  }
  if (name == "mixed") {
    cfg.problem = "mixed";
    cfg.dim = 2;
    cfg.u_hidden.assign(4, 40);
    cfg.train.n_interior = 5000;
    cfg.train.n_boundary = 600;
    cfg.train.iters = 10000;
    cfg.train.lr = 1e-3;
    cfg.train.lr_decay = 0.5;
    cfg.train.lr_step = 5000;
    cfg.train.test_points = 4000;
    cfg.slice_n = 81;
    return cfg;
  }
  if (name == "varcoeff_d5" || name == "quasilinear_d5") {
    cfg.problem = name == "varcoeff_d5" ? "varcoeff" : "quasilinear";
    cfg.dim = 5;
    cfg.m = 2;
    cfg.u_hidden.assign(4, 40);
    cfg.train.n_interior = 10000;
    cfg.train.n_boundary = 400;
    cfg.train.iters = 10000;
    cfg.train.lr = 2e-4;
    cfg.train.lr_decay = 1.0;  // fixed learning rate
    cfg.train.test_points = 4000;
    cfg.slice_axis1 = 0;
    cfg.slice_axis2 = 1;
    return cfg;
  }
  if (name.rfind("table1_n", 0) == 0) {
    d3_common();
    cfg.u_hidden = {40, 40};
    const std::string n = name.substr(8);
    if (n == "2500") {
      cfg.train.n_interior = 2500;
      cfg.train.n_boundary = 300;
    } else if (n == "5000") {
      cfg.train.n_interior = 5000;
      cfg.train.n_boundary = 432;
    } else if (n == "7500") {
      cfg.train.n_interior = 7500;
      cfg.train.n_boundary = 516;
    } else if (n == "10000") {
      cfg.train.n_interior = 10000;
      cfg.train.n_boundary = 600;
    } else {
      throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
  }
  if (name.rfind("table2_w", 0) == 0) {
    d3_common();
    const auto dpos = name.find("_d", 8);
    if (dpos == std::string::npos)
      throw ConfigError("unknown preset '" + name + "'");
    const int width = std::stoi(name.substr(8, dpos - 8));
    const int depth = std::stoi(name.substr(dpos + 2));
    if ((width != 10 && width != 20 && width != 40) || depth < 1 || depth > 3)
      throw ConfigError("unknown preset '" + name + "'");
    cfg.u_hidden.assign(depth, width);
    cfg.train.n_interior = 10000;
    cfg.train.n_boundary = 600;
    return cfg;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace infsup

#endif  // INFSUP_CONFIG_HPP
