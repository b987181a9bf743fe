#include "lab/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "lab/errors.hpp"
#include "lab/io.hpp"

#include "json.hpp"

namespace lab {

using nlohmann::json;

NodeField evaluate(const DataSpec& spec, const GridSpec& grid) {
  NodeField out = zero_nodes(grid);
  if (!spec.file.empty()) {
    std::FILE* fp = std::fopen(spec.file.c_str(), "rb");
    if (!fp) throw ConfigError({"data file not readable: " + spec.file});
    const std::size_t got = std::fread(out.data(), sizeof(double), out.size(), fp);
    std::fclose(fp);
    if (got != out.size()) {
      throw ConfigError({"data file " + spec.file + " holds " + std::to_string(got) +
                         " doubles, expected " + std::to_string(out.size())});
    }
    return out;
  }
  auto axis_eval = [](const DataAxis& a, double t) {
    switch (a.fn) {
      case DataAxis::Fn::constant:
        return 1.0;
      case DataAxis::Fn::sin:
        return std::sin(a.k * M_PI * t);
      case DataAxis::Fn::cos:
        return std::cos(a.k * M_PI * t);
      case DataAxis::Fn::poly:
        return std::pow(t, a.k);
    }
    return 0.0;
  };
  for (const auto& term : spec.terms) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        out[grid.node(i, j)] +=
            term.coef * axis_eval(term.x, grid.x(i)) * axis_eval(term.y, grid.y(j));
      }
    }
  }
  return out;
}

namespace {

// ---- Duplicate-key detection ------------------------------------------

struct DuplicateKey {
  std::string key;
};

json parse_rejecting_duplicates(const std::string& text) {
  std::vector<std::set<std::string>> stack;
  json::parser_callback_t cb = [&stack](int /*depth*/, json::parse_event_t event,
                                        json& parsed) {
    if (event == json::parse_event_t::object_start) {
      stack.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      stack.pop_back();
    } else if (event == json::parse_event_t::key) {
      const std::string key = parsed.get<std::string>();
      if (!stack.back().insert(key).second) {
        throw DuplicateKey{key};
      }
    }
    return true;
  };
  return json::parse(text, cb);
}

// ---- Schema walking -----------------------------------------------------

struct Validator {
  std::vector<std::string> violations;

  void complain(const std::string& where, const std::string& what) {
    violations.push_back(where + ": " + what);
  }

  void check_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        complain(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
      }
    }
  }

  bool want_object(const json& v, const std::string& where) {
    if (!v.is_object()) {
      complain(where, "must be an object");
      return false;
    }
    return true;
  }

  double number(const json& obj, const std::string& where, const char* key,
                double fallback, double lo, double hi) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      complain(where + "." + key, "must be a number");
      return fallback;
    }
    const double x = v.get<double>();
    if (x < lo || x > hi) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "must lie in [%g, %g], got %g", lo, hi, x);
      complain(where + "." + key, buf);
      return fallback;
    }
    return x;
  }

  int integer(const json& obj, const std::string& where, const char* key,
              int fallback, int lo, int hi) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      complain(where + "." + key, "must be an integer");
      return fallback;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      complain(where + "." + key,
               "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                   "], got " + std::to_string(x));
      return fallback;
    }
    return static_cast<int>(x);
  }

  bool boolean(const json& obj, const std::string& where, const char* key,
               bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      complain(where + "." + key, "must be a boolean");
      return fallback;
    }
    return v.get<bool>();
  }

  std::string text(const json& obj, const std::string& where, const char* key,
                   const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      complain(where + "." + key, "must be a string");
      return fallback;
    }
    return v.get<std::string>();
  }
};

ShapeSpec parse_shape(Validator& val, const json& v, const std::string& where);

ShapeSpec parse_shape_children(Validator& val, const json& v, const std::string& where,
                               ShapeSpec::Kind kind) {
  ShapeSpec s;
  s.kind = kind;
  if (!v.contains("shapes") || !v.at("shapes").is_array() ||
      v.at("shapes").size() < (kind == ShapeSpec::Kind::difference ? 2u : 1u)) {
    val.complain(where + ".shapes", "must be a non-empty array of shapes");
    return s;
  }
  for (std::size_t k = 0; k < v.at("shapes").size(); ++k) {
    s.children.push_back(
        parse_shape(val, v.at("shapes")[k], where + ".shapes[" + std::to_string(k) + "]"));
  }
  return s;
}

ShapeSpec parse_shape(Validator& val, const json& v, const std::string& where) {
  ShapeSpec s;
  if (!v.is_object()) {
    val.complain(where, "shape must be an object");
    return s;
  }
  const std::string type = val.text(v, where, "type", "");
  if (type == "box_margin") {
    val.check_keys(v, where, {"type", "margin"});
    s = ShapeSpec::BoxMargin(val.number(v, where, "margin", 0.1, 0.0, 0.5));
  } else if (type == "rect") {
    val.check_keys(v, where, {"type", "x0", "y0", "x1", "y1"});
    s = ShapeSpec::Rect(val.number(v, where, "x0", 0.0, -1e9, 1e9),
                        val.number(v, where, "y0", 0.0, -1e9, 1e9),
                        val.number(v, where, "x1", 1.0, -1e9, 1e9),
                        val.number(v, where, "y1", 1.0, -1e9, 1e9));
  } else if (type == "disk") {
    val.check_keys(v, where, {"type", "center", "radius"});
    double cx = 0.5, cy = 0.5;
    if (v.contains("center")) {
      const json& c = v.at("center");
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
        val.complain(where + ".center", "must be [x, y]");
      } else {
        cx = c[0].get<double>();
        cy = c[1].get<double>();
      }
    }
    s = ShapeSpec::Disk(cx, cy, val.number(v, where, "radius", 0.3, 0.0, 1e9));
  } else if (type == "union") {
    val.check_keys(v, where, {"type", "shapes"});
    s = parse_shape_children(val, v, where, ShapeSpec::Kind::union_);
  } else if (type == "intersection") {
    val.check_keys(v, where, {"type", "shapes"});
    s = parse_shape_children(val, v, where, ShapeSpec::Kind::intersection);
  } else if (type == "difference") {
    val.check_keys(v, where, {"type", "shapes"});
    s = parse_shape_children(val, v, where, ShapeSpec::Kind::difference);
  } else {
    val.complain(where + ".type",
                 "must be one of box_margin|rect|disk|union|intersection|difference");
  }
  return s;
}

DataAxis parse_axis(Validator& val, const json& v, const std::string& where) {
  DataAxis a;
  if (!v.is_object()) {
    val.complain(where, "must be an object {fn, k}");
    return a;
  }
  val.check_keys(v, where, {"fn", "k"});
  const std::string fn = val.text(v, where, "fn", "const");
  if (fn == "const") {
    a.fn = DataAxis::Fn::constant;
  } else if (fn == "sin") {
    a.fn = DataAxis::Fn::sin;
  } else if (fn == "cos") {
    a.fn = DataAxis::Fn::cos;
  } else if (fn == "poly") {
    a.fn = DataAxis::Fn::poly;
  } else {
    val.complain(where + ".fn", "must be one of const|sin|cos|poly");
  }
  a.k = val.number(v, where, "k", 1.0, -64.0, 64.0);
  return a;
}

DataTerm parse_term(Validator& val, const json& v, const std::string& where) {
  DataTerm t;
  if (v.is_number()) {
    t.coef = v.get<double>();
    return t;
  }
  if (!v.is_object()) {
    val.complain(where, "must be a number or a term object");
    return t;
  }
  val.check_keys(v, where, {"coef", "x", "y", "const"});
  if (v.contains("const")) {
    t.coef = val.number(v, where, "const", 0.0, -1e12, 1e12);
    return t;
  }
  t.coef = val.number(v, where, "coef", 1.0, -1e12, 1e12);
  if (v.contains("x")) t.x = parse_axis(val, v.at("x"), where + ".x");
  if (v.contains("y")) t.y = parse_axis(val, v.at("y"), where + ".y");
  return t;
}

DataSpec parse_data(Validator& val, const json& v, const std::string& where,
                    double default_const) {
  DataSpec d;
  if (v.is_null()) {
    d.terms.push_back(DataTerm{default_const, {}, {}});
    return d;
  }
  if (v.is_number()) {
    d.terms.push_back(DataTerm{v.get<double>(), {}, {}});
    return d;
  }
  if (v.is_object() && v.contains("file")) {
    val.check_keys(v, where, {"file"});
    d.file = val.text(v, where, "file", "");
    return d;
  }
  if (v.is_array()) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      d.terms.push_back(parse_term(val, v[k], where + "[" + std::to_string(k) + "]"));
    }
    return d;
  }
  d.terms.push_back(parse_term(val, v, where));
  return d;
}

json shape_to_json(const ShapeSpec& s) {
  json j;
  switch (s.kind) {
    case ShapeSpec::Kind::box_margin:
      j = {{"type", "box_margin"}, {"margin", s.margin}};
      break;
    case ShapeSpec::Kind::rect:
      j = {{"type", "rect"}, {"x0", s.rect[0]}, {"y0", s.rect[1]}, {"x1", s.rect[2]},
           {"y1", s.rect[3]}};
      break;
    case ShapeSpec::Kind::disk:
      j = {{"type", "disk"}, {"center", {s.center[0], s.center[1]}},
           {"radius", s.radius}};
      break;
    case ShapeSpec::Kind::polygon: {
      j["type"] = "polygon";
      json verts = json::array();
      for (const auto& v : s.vertices) verts.push_back({v[0], v[1]});
      j["vertices"] = verts;
      break;
    }
    case ShapeSpec::Kind::sine_channel:
      j = {{"type", "sine_channel"}, {"y0", s.y0},         {"x0", s.x0},
           {"x1", s.x1},             {"amplitude", s.amplitude},
           {"waves", s.waves},       {"width", s.width}};
      break;
    case ShapeSpec::Kind::union_:
    case ShapeSpec::Kind::intersection:
    case ShapeSpec::Kind::difference: {
      j["type"] = s.kind == ShapeSpec::Kind::union_        ? "union"
                  : s.kind == ShapeSpec::Kind::intersection ? "intersection"
                                                            : "difference";
      json parts = json::array();
      for (const auto& c : s.children) parts.push_back(shape_to_json(c));
      j["shapes"] = parts;
      break;
    }
  }
  return j;
}

json data_to_json(const DataSpec& d) {
  if (!d.file.empty()) return json{{"file", d.file}};
  json arr = json::array();
  auto axis = [](const DataAxis& a) {
    const char* fn = a.fn == DataAxis::Fn::constant ? "const"
                     : a.fn == DataAxis::Fn::sin    ? "sin"
                     : a.fn == DataAxis::Fn::cos    ? "cos"
                                                    : "poly";
    return json{{"fn", fn}, {"k", a.k}};
  };
  for (const auto& t : d.terms) {
    arr.push_back(json{{"coef", t.coef}, {"x", axis(t.x)}, {"y", axis(t.y)}});
  }
  return arr;
}

ProblemConfig build_config(const json& root) {
  Validator val;
  ProblemConfig cfg;

  if (!root.is_object()) {
    throw ConfigError({"top level: must be a JSON object"});
  }
  val.check_keys(root, "",
                 {"grid", "params", "domain", "domain_b", "family", "data", "kernel",
                  "control", "solver", "hammerstein", "optimizer", "study", "seed"});

  // grid
  if (root.contains("grid") && val.want_object(root.at("grid"), "grid")) {
    const json& g = root.at("grid");
    val.check_keys(g, "grid", {"nx", "ny"});
    cfg.grid.nx = val.integer(g, "grid", "nx", 33, 3, 4097);
    cfg.grid.ny = val.integer(g, "grid", "ny", 33, 3, 4097);
  } else {
    cfg.grid.nx = cfg.grid.ny = 33;
  }
  if (cfg.grid.nx != cfg.grid.ny) {
    val.complain("grid", "nx and ny must agree (square cells on the unit box)");
  }

  // params
  {
    json p = root.contains("params") ? root.at("params") : json::object();
    if (val.want_object(p, "params")) {
      val.check_keys(p, "params", {"p", "alpha", "beta", "xi_lower", "xi_upper"});
      cfg.params.p = val.number(p, "params", "p", 2.0, 2.0, 4.0);
      cfg.params.alpha = val.number(p, "params", "alpha", 0.5, 1e-12, 1e12);
      cfg.params.beta = val.number(p, "params", "beta", 2.0, 1e-12, 1e12);
      cfg.params.xi_lower_const = val.number(p, "params", "xi_lower", 0.0, 0.0, 1e12);
      cfg.params.xi_upper_const =
          val.number(p, "params", "xi_upper", 1e100, 0.0, 1e300);
      if (cfg.params.alpha > cfg.params.beta) {
        val.complain("params", "alpha must not exceed beta");
      }
      if (cfg.params.xi_lower_const > cfg.params.xi_upper_const) {
        val.complain("params", "xi_lower must not exceed xi_upper");
      }
    }
  }

  // domain / domain_b
  if (root.contains("domain")) {
    cfg.domain = parse_shape(val, root.at("domain"), "domain");
  }
  if (root.contains("domain_b")) {
    cfg.domain_b = parse_shape(val, root.at("domain_b"), "domain_b");
  }

  // family
  if (root.contains("family") && val.want_object(root.at("family"), "family")) {
    const json& f = root.at("family");
    val.check_keys(f, "family", {"kind", "eps", "geometry"});
    FamilySpec fam;
    const std::string kind = val.text(f, "family", "kind", "shrinking_hole");
    if (kind == "dumbbell") {
      fam.kind = FamilyKind::dumbbell;
    } else if (kind == "oscillating_crack") {
      fam.kind = FamilyKind::oscillating_crack;
    } else if (kind == "shrinking_hole") {
      fam.kind = FamilyKind::shrinking_hole;
    } else if (kind == "polygon_disk") {
      fam.kind = FamilyKind::polygon_disk;
    } else {
      val.complain("family.kind",
                   "must be one of dumbbell|oscillating_crack|shrinking_hole|"
                   "polygon_disk");
    }
    if (!f.contains("eps") || !f.at("eps").is_array() || f.at("eps").empty()) {
      val.complain("family.eps", "must be a non-empty array of decreasing numbers");
    } else {
      for (const auto& e : f.at("eps")) {
        if (!e.is_number() || e.get<double>() <= 0.0) {
          val.complain("family.eps", "entries must be positive numbers");
          break;
        }
        fam.eps_list.push_back(e.get<double>());
      }
    }
    if (f.contains("geometry") && val.want_object(f.at("geometry"), "family.geometry")) {
      const json& ge = f.at("geometry");
      val.check_keys(ge, "family.geometry",
                     {"disk_radius", "cx1", "cx2", "cy", "cx", "r", "base_margin",
                      "crack_y", "crack_x0", "crack_x1", "crack_waves"});
      FamilyGeometry& g = fam.geometry;
      g.disk_radius = val.number(ge, "family.geometry", "disk_radius", g.disk_radius,
                                 1e-6, 0.5);
      g.cx1 = val.number(ge, "family.geometry", "cx1", g.cx1, 0.0, 1.0);
      g.cx2 = val.number(ge, "family.geometry", "cx2", g.cx2, 0.0, 1.0);
      g.cy = val.number(ge, "family.geometry", "cy", g.cy, 0.0, 1.0);
      g.cx = val.number(ge, "family.geometry", "cx", g.cx, 0.0, 1.0);
      g.r = val.number(ge, "family.geometry", "r", g.r, 1e-6, 0.5);
      g.base_margin = val.number(ge, "family.geometry", "base_margin", g.base_margin,
                                 0.0, 0.5);
      g.crack_y = val.number(ge, "family.geometry", "crack_y", g.crack_y, 0.0, 1.0);
      g.crack_x0 = val.number(ge, "family.geometry", "crack_x0", g.crack_x0, 0.0, 1.0);
      g.crack_x1 = val.number(ge, "family.geometry", "crack_x1", g.crack_x1, 0.0, 1.0);
      g.crack_waves =
          val.number(ge, "family.geometry", "crack_waves", g.crack_waves, 0.5, 64.0);
    }
    cfg.family = std::move(fam);
  }

  // data
  {
    json d = root.contains("data") ? root.at("data") : json::object();
    if (val.want_object(d, "data")) {
      val.check_keys(d, "data", {"f", "g", "z_d"});
      cfg.f = parse_data(val, d.contains("f") ? d.at("f") : json(), "data.f", 1.0);
      cfg.g = parse_data(val, d.contains("g") ? d.at("g") : json(), "data.g", 0.0);
      cfg.z_d =
          parse_data(val, d.contains("z_d") ? d.at("z_d") : json(), "data.z_d", 0.0);
    }
  }

  // kernel
  {
    json k = root.contains("kernel") ? root.at("kernel") : json::object();
    if (val.want_object(k, "kernel")) {
      val.check_keys(k, "kernel", {"kind", "sigma", "scale", "ridge"});
      const std::string kind = val.text(k, "kernel", "kind", "gaussian_ridge");
      if (kind == "gaussian_ridge") {
        cfg.kernel.kind = KernelSpec::Kind::gaussian_ridge;
      } else if (kind == "scaled_identity") {
        cfg.kernel.kind = KernelSpec::Kind::scaled_identity;
      } else {
        val.complain("kernel.kind", "must be gaussian_ridge or scaled_identity");
      }
      cfg.kernel.sigma = val.number(k, "kernel", "sigma", 0.15, 1e-9, 1e9);
      cfg.kernel.scale = val.number(k, "kernel", "scale", 1.0, 0.0, 1e9);
      cfg.kernel.ridge = val.number(k, "kernel", "ridge", 0.5, 1e-12, 1e9);
    }
  }

  // control
  {
    json c = root.contains("control") ? root.at("control") : json::object();
    if (val.want_object(c, "control")) {
      val.check_keys(c, "control", {"n1", "n2", "init"});
      cfg.n1 = val.integer(c, "control", "n1", 4, 1, 4096);
      cfg.n2 = val.integer(c, "control", "n2", 4, 1, 4096);
      if (c.contains("init")) {
        const json& init = c.at("init");
        if (init.is_number()) {
          cfg.control_init.assign(cfg.n1 + cfg.n2, init.get<double>());
        } else if (init.is_array()) {
          for (const auto& v : init) {
            if (!v.is_number()) {
              val.complain("control.init", "entries must be numbers");
              break;
            }
            cfg.control_init.push_back(v.get<double>());
          }
          if (static_cast<int>(cfg.control_init.size()) != cfg.n1 + cfg.n2) {
            val.complain("control.init", "array must have n1+n2 entries");
          }
        } else {
          val.complain("control.init", "must be a number or an array");
        }
      }
    }
  }

  // solver
  {
    json s = root.contains("solver") ? root.at("solver") : json::object();
    if (val.want_object(s, "solver")) {
      val.check_keys(s, "solver",
                     {"tolerance", "max_iterations", "damping", "newton_inner_rtol"});
      cfg.solver.tolerance = val.number(s, "solver", "tolerance", 1e-9, 1e-15, 1.0);
      cfg.solver.max_iterations =
          val.integer(s, "solver", "max_iterations", 50000, 1, 100000000);
      cfg.solver.damping = val.number(s, "solver", "damping", 1.0, 1e-6, 1.0);
      cfg.solver.newton_inner_rtol =
          val.number(s, "solver", "newton_inner_rtol", 1e-2, 1e-12, 1.0);
    }
  }

  // hammerstein
  {
    json hj = root.contains("hammerstein") ? root.at("hammerstein") : json::object();
    if (val.want_object(hj, "hammerstein")) {
      val.check_keys(hj, "hammerstein", {"tolerance", "max_iterations"});
      cfg.hammerstein.tolerance =
          val.number(hj, "hammerstein", "tolerance", 1e-9, 1e-15, 1.0);
      cfg.hammerstein.max_iterations =
          val.integer(hj, "hammerstein", "max_iterations", 100, 1, 1000000);
    }
  }

  // optimizer
  {
    json o = root.contains("optimizer") ? root.at("optimizer") : json::object();
    if (val.want_object(o, "optimizer")) {
      val.check_keys(o, "optimizer",
                     {"max_iterations", "tolerance", "initial_step", "fd_step",
                      "gradient", "threads"});
      cfg.optimizer.max_iterations =
          val.integer(o, "optimizer", "max_iterations", 60, 0, 1000000);
      cfg.optimizer.tolerance = val.number(o, "optimizer", "tolerance", 1e-6, 0.0, 1.0);
      cfg.optimizer.initial_step =
          val.number(o, "optimizer", "initial_step", 1.0, 1e-12, 1e6);
      cfg.optimizer.fd_step = val.number(o, "optimizer", "fd_step", 1e-6, 1e-12, 1.0);
      const std::string gm = val.text(o, "optimizer", "gradient", "auto");
      if (gm == "auto") {
        cfg.optimizer.gradient = OptimizerOptions::GradientMode::automatic;
      } else if (gm == "fd") {
        cfg.optimizer.gradient = OptimizerOptions::GradientMode::finite_difference;
      } else if (gm == "adjoint") {
        cfg.optimizer.gradient = OptimizerOptions::GradientMode::adjoint;
      } else {
        val.complain("optimizer.gradient", "must be auto|fd|adjoint");
      }
      cfg.optimizer.threads = val.integer(o, "optimizer", "threads", 0, 0, 1024);
    }
  }

  // study
  {
    json st = root.contains("study") ? root.at("study") : json::object();
    if (val.want_object(st, "study")) {
      val.check_keys(st, "study",
                     {"support_condition", "warm_start", "slack",
                      "value_gap_threshold", "state_gap_threshold", "threads"});
      cfg.study.support_condition = val.boolean(st, "study", "support_condition", true);
      cfg.study.warm_start = val.boolean(st, "study", "warm_start", true);
      cfg.study.slack = val.number(st, "study", "slack", 0.05, 0.0, 10.0);
      cfg.study.value_gap_threshold =
          val.number(st, "study", "value_gap_threshold", 1e-2, 1e-12, 1e3);
      cfg.study.state_gap_threshold =
          val.number(st, "study", "state_gap_threshold", 5e-2, 1e-12, 1e3);
      cfg.study.threads = val.integer(st, "study", "threads", 0, 0, 1024);
    }
  }

  // seed
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer()) {
      val.complain("seed", "must be a nonnegative integer");
    } else {
      const long long v = s.get<long long>();
      if (v < 0) {
        val.complain("seed", "must be a nonnegative integer");
      } else {
        cfg.seed = static_cast<std::uint64_t>(v);
      }
    }
  }

  if (!val.violations.empty()) {
    throw ConfigError(std::move(val.violations));
  }

  // Canonical effective form (defaults filled, keys sorted by nlohmann).
  json eff;
  eff["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}};
  eff["params"] = {{"p", cfg.params.p},
                   {"alpha", cfg.params.alpha},
                   {"beta", cfg.params.beta},
                   {"xi_lower", cfg.params.xi_lower_const},
                   {"xi_upper", cfg.params.xi_upper_const}};
  if (cfg.domain) eff["domain"] = shape_to_json(*cfg.domain);
  if (cfg.domain_b) eff["domain_b"] = shape_to_json(*cfg.domain_b);
  if (cfg.family) {
    const char* kind = nullptr;
    switch (cfg.family->kind) {
      case FamilyKind::dumbbell: kind = "dumbbell"; break;
      case FamilyKind::oscillating_crack: kind = "oscillating_crack"; break;
      case FamilyKind::shrinking_hole: kind = "shrinking_hole"; break;
      case FamilyKind::polygon_disk: kind = "polygon_disk"; break;
    }
    const FamilyGeometry& g = cfg.family->geometry;
    eff["family"] = {{"kind", kind},
                     {"eps", cfg.family->eps_list},
                     {"geometry",
                      {{"disk_radius", g.disk_radius},
                       {"cx1", g.cx1},
                       {"cx2", g.cx2},
                       {"cy", g.cy},
                       {"cx", g.cx},
                       {"r", g.r},
                       {"base_margin", g.base_margin},
                       {"crack_y", g.crack_y},
                       {"crack_x0", g.crack_x0},
                       {"crack_x1", g.crack_x1},
                       {"crack_waves", g.crack_waves}}}};
  }
  eff["data"] = {{"f", data_to_json(cfg.f)},
                 {"g", data_to_json(cfg.g)},
                 {"z_d", data_to_json(cfg.z_d)}};
  eff["kernel"] = {{"kind", cfg.kernel.kind == KernelSpec::Kind::gaussian_ridge
                                ? "gaussian_ridge"
                                : "scaled_identity"},
                   {"sigma", cfg.kernel.sigma},
                   {"scale", cfg.kernel.scale},
                   {"ridge", cfg.kernel.ridge}};
  eff["control"] = {{"n1", cfg.n1}, {"n2", cfg.n2}, {"init", cfg.control_init}};
  eff["solver"] = {{"tolerance", cfg.solver.tolerance},
                   {"max_iterations", cfg.solver.max_iterations},
                   {"damping", cfg.solver.damping},
                   {"newton_inner_rtol", cfg.solver.newton_inner_rtol}};
  eff["hammerstein"] = {{"tolerance", cfg.hammerstein.tolerance},
                        {"max_iterations", cfg.hammerstein.max_iterations}};
  eff["optimizer"] = {
      {"max_iterations", cfg.optimizer.max_iterations},
      {"tolerance", cfg.optimizer.tolerance},
      {"initial_step", cfg.optimizer.initial_step},
      {"fd_step", cfg.optimizer.fd_step},
      {"gradient",
       cfg.optimizer.gradient == OptimizerOptions::GradientMode::automatic ? "auto"
       : cfg.optimizer.gradient == OptimizerOptions::GradientMode::adjoint
           ? "adjoint"
           : "fd"},
      {"threads", cfg.optimizer.threads}};
  eff["study"] = {{"support_condition", cfg.study.support_condition},
                  {"warm_start", cfg.study.warm_start},
                  {"slack", cfg.study.slack},
                  {"value_gap_threshold", cfg.study.value_gap_threshold},
                  {"state_gap_threshold", cfg.study.state_gap_threshold},
                  {"threads", cfg.study.threads}};
  eff["seed"] = cfg.seed;
  cfg.effective = eff.dump();
  return cfg;
}

}  // namespace

std::uint64_t ProblemConfig::hash() const { return fnv1a64(effective); }

void ProblemConfig::set_seed(std::uint64_t s) {
  seed = s;
  json eff = json::parse(effective);
  eff["seed"] = s;
  effective = eff.dump();
}

ProblemConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = parse_rejecting_duplicates(text);
  } catch (const DuplicateKey& dup) {
    throw ConfigError({"duplicate key \"" + dup.key + "\""});
  } catch (const json::parse_error& err) {
    throw ConfigError({std::string("malformed JSON: ") + err.what()});
  }
  return build_config(root);
}

ProblemConfig parse_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const LabError&) {
    throw ConfigError({"config file not readable: " + path});
  }
  return parse_config_text(text);
}

}  // namespace lab
