#include "loewner/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>

#include "loewner/io.hpp"

namespace loewner {

namespace {

using io::CsvWriter;
using io::format_double;
using io::Json;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("LOEWNER_LOG");
    return env ? std::atoi(env) : 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[loewner-control] " << msg << "\n";
}

double time_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    require(s == "inf" || s == "infinity", "times are numbers or \"inf\"");
    return std::numeric_limits<double>::infinity();
  }
  require(j.is_number(), "times are numbers or \"inf\"");
  return j.get<double>();
}

std::vector<double> time_list_from_json(const Json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const Json& v : j) out.push_back(time_from_json(v));
  } else {
    out.push_back(time_from_json(j));
  }
  require(!out.empty(), "time list must be nonempty");
  return out;
}

std::vector<CVec> points_from_json(const Json& j, int dim) {
  require(j.is_array() && !j.empty(), "points must be a nonempty array");
  std::vector<CVec> out;
  for (const Json& p : j) out.push_back(io::vector_from_json(p, dim));
  return out;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? std::string("scenario") : out;
}

struct Context {
  Json doc;
  int dim = 1;
  std::string name;
  std::filesystem::path out_dir;
  IntegrationOptions integ;
  ScaledLimitOptions limit;

  std::filesystem::path table_path(const std::string& table) const {
    return out_dir / (name + "__" + table + ".csv");
  }
  std::filesystem::path report_path() const {
    return out_dir / (name + "__report.txt");
  }
};

HerglotzField parse_field(const Context& ctx) {
  require(ctx.doc.contains("field"), "scenario needs a field");
  return io::field_from_json(ctx.doc["field"], ctx.dim);
}

void finish(const Context& ctx, Json& report) {
  io::write_text(ctx.report_path(), io::render_report(report));
  log_info("report written to " + ctx.report_path().string());
}

// ---------------------------------------------------------------------------

int run_flow(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const double s = ctx.doc.value("s", 0.0);
  const std::vector<double> times = time_list_from_json(ctx.doc.at("t"));
  const std::vector<CVec> points = points_from_json(ctx.doc.at("points"), ctx.dim);
  const bool has_via = ctx.doc.contains("compose_via");
  const double via = has_via ? ctx.doc["compose_via"].get<double>() : 0.0;

  std::vector<std::string> header{"s", "t", "point_index"};
  for (const auto& h : io::point_header("z", ctx.dim)) header.push_back(h);
  for (const auto& h : io::point_header("phi", ctx.dim)) header.push_back(h);
  CsvWriter values(ctx.table_path("flow"), header);

  std::vector<std::string> jac_header{"s", "t", "point_index"};
  for (int r = 1; r <= ctx.dim; ++r)
    for (int c = 1; c <= ctx.dim; ++c) {
      jac_header.push_back("jac" + std::to_string(r) + std::to_string(c) + "_re");
      jac_header.push_back("jac" + std::to_string(r) + std::to_string(c) + "_im");
    }
  CsvWriter jacobians(ctx.table_path("flow_jacobian"), jac_header);

  Json rows = Json::array();
  for (double t : times) {
    require(!std::isinf(t), "flow times must be finite; use the map task for limits");
    const FlowResult flow = integrate_flow(field, s, t, points, ctx.integ);
    for (size_t j = 0; j < points.size(); ++j) {
      std::vector<std::string> cells{format_double(s), format_double(t),
                                     std::to_string(j)};
      for (const auto& c : io::point_cells(points[j])) cells.push_back(c);
      for (const auto& c : io::point_cells(flow.values[j])) cells.push_back(c);
      values.row(cells);

      std::vector<std::string> jac_cells{format_double(s), format_double(t),
                                         std::to_string(j)};
      for (int r = 0; r < ctx.dim; ++r)
        for (int c = 0; c < ctx.dim; ++c) {
          jac_cells.push_back(format_double(flow.jacobians[j](r, c).real()));
          jac_cells.push_back(format_double(flow.jacobians[j](r, c).imag()));
        }
      jacobians.row(jac_cells);
    }
    Json row;
    row["t"] = t;
    row["steps_taken"] = flow.steps_taken;
    row["error_estimate"] = flow.error_estimate;
    if (has_via) {
      const EvolutionCheck check = evolution_map(field, s, via, t, points, ctx.integ);
      row["composition_residual"] = check.residual;
    }
    rows.push_back(std::move(row));
  }
  report["flow"] = std::move(rows);
  report["tables"] = Json::array({values.path().filename().string(), jacobians.path().filename().string()});
  report["verdict"] = "flow computed";
  return kExitPass;
}

int run_map(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const double s = ctx.doc.value("s", 0.0);
  ScaledLimitOptions limit = ctx.limit;
  if (ctx.doc.contains("tol")) limit.tol = ctx.doc["tol"].get<double>();

  Json tables = Json::array();
  if (ctx.doc.contains("points")) {
    const std::vector<CVec> points = points_from_json(ctx.doc["points"], ctx.dim);
    const ScaledLimit lim = scaled_limit(field, s, points, limit);
    std::vector<std::string> header{"point_index"};
    for (const auto& h : io::point_header("z", ctx.dim)) header.push_back(h);
    for (const auto& h : io::point_header("f", ctx.dim)) header.push_back(h);
    CsvWriter csv(ctx.table_path("map"), header);
    for (size_t j = 0; j < points.size(); ++j) {
      std::vector<std::string> cells{std::to_string(j)};
      for (const auto& c : io::point_cells(points[j])) cells.push_back(c);
      for (const auto& c : io::point_cells(lim.values[j])) cells.push_back(c);
      csv.row(cells);
    }
    report["horizon"] = lim.horizon;
    report["truncation_bound"] = lim.truncation_bound;
    tables.push_back(csv.path().filename().string());
  }
  if (ctx.doc.contains("degree") || !ctx.doc.contains("points")) {
    const int degree = ctx.doc.value("degree", 6);
    const ScaledLimit lim = scaled_limit_jet(field, s, degree, limit);
    std::vector<std::string> header{"component"};
    for (int i = 1; i <= ctx.dim; ++i) header.push_back("alpha_" + std::to_string(i));
    header.push_back("re");
    header.push_back("im");
    CsvWriter csv(ctx.table_path("map_jet"), header);
    const Jet& jet = *lim.jet;
    for (int k = 0; k < ctx.dim; ++k) {
      for (int col = 0; col < jet.basis().size(); ++col) {
        const Cplx c = jet.table()(k, col);
        std::vector<std::string> cells{std::to_string(k + 1)};
        for (int e : jet.basis().index(col)) cells.push_back(std::to_string(e));
        cells.push_back(format_double(c.real()));
        cells.push_back(format_double(c.imag()));
        csv.row(cells);
      }
    }
    report["jet_horizon"] = lim.horizon;
    tables.push_back(csv.path().filename().string());
  }
  require(!tables.empty(), "map task needs points and/or degree");
  report["tables"] = std::move(tables);
  report["verdict"] = "limit map computed";
  return kExitPass;
}

int run_membership(const Context& ctx, Json& report) {
  std::vector<MapDescriptor> descriptors;
  std::vector<std::string> labels;
  if (ctx.doc.contains("descriptors")) {
    int i = 0;
    for (const Json& d : ctx.doc["descriptors"]) {
      descriptors.push_back(io::descriptor_from_json(d, ctx.dim));
      labels.push_back("descriptor " + std::to_string(i++));
    }
  }
  if (ctx.doc.contains("field")) {
    // field pieces are checked individually; bypass the constructor gate
    const Json& f = ctx.doc["field"];
    if (f.contains("kind")) {
      descriptors.push_back(io::descriptor_from_json(f, ctx.dim));
      labels.push_back("field piece 0");
    } else {
      int i = 0;
      for (const Json& p : f.at("pieces")) {
        descriptors.push_back(io::descriptor_from_json(p, ctx.dim));
        labels.push_back("field piece " + std::to_string(i++));
      }
    }
  }
  require(!descriptors.empty(), "membership task needs descriptors or a field");
  const double tol = ctx.doc.value("tol", 1e-12);

  std::vector<std::string> header{"index", "pass", "normalization_ok", "worst_margin"};
  for (const auto& h : io::point_header("worst", ctx.dim)) header.push_back(h);
  CsvWriter csv(ctx.table_path("membership"), header);

  bool all_pass = true;
  Json rows = Json::array();
  for (size_t i = 0; i < descriptors.size(); ++i) {
    const MembershipReport r = check_class_membership(descriptors[i],
                                                      default_membership_grid(), tol);
    all_pass = all_pass && r.pass;
    std::vector<std::string> cells{std::to_string(i), r.pass ? "1" : "0",
                                   r.normalization_ok ? "1" : "0",
                                   format_double(r.worst_margin)};
    for (const auto& c : io::point_cells(r.worst_point)) cells.push_back(c);
    csv.row(cells);

    Json row;
    row["label"] = labels[i];
    row["pass"] = r.pass;
    row["normalization_ok"] = r.normalization_ok;
    row["worst_margin"] = r.worst_margin;
    row["worst_point"] = io::vector_to_json(r.worst_point);
    rows.push_back(std::move(row));
  }
  report["membership"] = std::move(rows);

  if (ctx.doc.contains("radius_probe")) {
    const Jet p = io::jet_from_json(ctx.doc["radius_probe"], ctx.dim, 2);
    const double radius = membership_radius(p, ctx.doc.value("radius_tol", 1e-4));
    report["perturbation_radius"] =
        std::isinf(radius) ? Json("infinite") : Json(radius);
  }
  report["tables"] = Json::array({csv.path().filename().string()});
  report["verdict"] = all_pass ? "all descriptors pass" : "membership violated";
  return all_pass ? kExitPass : kExitCheckFail;
}

int run_vary(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const double s = ctx.doc.value("s", 0.0);
  const double T = ctx.doc.at("T").get<double>();
  const MapDescriptor needle = io::descriptor_from_json(ctx.doc.at("needle"), ctx.dim);
  const std::vector<double> times = time_list_from_json(ctx.doc.at("t"));
  const std::vector<CVec> points = points_from_json(ctx.doc.at("points"), ctx.dim);

  VariationCheckOptions opts;
  opts.integ = ctx.integ;
  opts.integ.abs_tol = std::min(opts.integ.abs_tol, 1e-12);
  opts.integ.rel_tol = std::min(opts.integ.rel_tol, 1e-12);
  opts.limit = ctx.limit;
  if (ctx.doc.contains("ladder")) opts.ladder = ctx.doc["ladder"].get<std::vector<double>>();
  opts.decay_threshold = ctx.doc.value("threshold", 0.75);
  opts.residual_floor = ctx.doc.value("floor", 1e-10);

  bool all_pass = true;
  Json sections = Json::array();
  Json tables = Json::array();
  for (size_t i = 0; i < times.size(); ++i) {
    const ResidualReport r =
        verify_variation(field, needle, s, T, times[i], points, opts);
    all_pass = all_pass && r.pass;

    CsvWriter csv(ctx.table_path("vary_" + std::to_string(i)),
                  {"epsilon", "residual", "decay_ratio"});
    for (size_t k = 0; k < r.ladder.size(); ++k) {
      csv.row({format_double(r.ladder[k]), format_double(r.residuals[k]),
               k == 0 ? "" : format_double(r.decay_ratios[k - 1])});
    }
    tables.push_back(csv.path().filename().string());

    Json section;
    section["t"] = std::isinf(times[i]) ? Json("inf") : Json(times[i]);
    section["pass"] = r.pass;
    section["term_norm"] = r.term_norm;
    section["normalized_terminal"] = r.normalized_terminal;
    section["threshold"] = r.threshold;
    section["floor"] = r.floor;
    sections.push_back(std::move(section));
  }
  report["variation"] = std::move(sections);
  report["tables"] = std::move(tables);
  report["verdict"] = all_pass ? "first-order term verified" : "decay check failed";
  return all_pass ? kExitPass : kExitCheckFail;
}

ControlFamily parse_family(const Context& ctx) {
  if (ctx.doc.contains("family")) return io::family_from_json(ctx.doc["family"], ctx.dim);
  return ControlFamily::slice_grid();
}

int run_hamiltonian(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const LinearFunctional functional =
      io::functional_from_json(ctx.doc.at("functional"), ctx.dim);
  const ControlFamily family = parse_family(ctx);
  const std::vector<double> t_grid = ctx.doc.at("t_grid").get<std::vector<double>>();

  const HamiltonianScan scan =
      hamiltonian_scan(functional, field, family, t_grid, ctx.integ, ctx.limit);

  std::vector<std::string> header{"t",       "m",      "argmax_index",
                                  "argmax_label", "zeta_re", "zeta_im"};
  for (const auto& h : io::point_header("u", ctx.dim)) header.push_back(h);
  CsvWriter csv(ctx.table_path("hamiltonian"), header);
  for (const ScanEntry& e : scan.entries) {
    std::vector<std::string> cells{format_double(e.t), format_double(e.m),
                                   std::to_string(e.maximizer.index),
                                   e.maximizer.label,
                                   format_double(e.maximizer.zeta.real()),
                                   format_double(e.maximizer.zeta.imag())};
    const CVec u = e.maximizer.u.size() == ctx.dim ? e.maximizer.u
                                                   : CVec(CVec::Zero(ctx.dim));
    for (const auto& c : io::point_cells(u)) cells.push_back(c);
    csv.row(cells);
  }
  report["constancy_deviation"] = scan.constancy_deviation;
  report["family_note"] =
      "m(t) is a lower bound for the full-class maximum over a strict subfamily";
  report["tables"] = Json::array({csv.path().filename().string()});

  if (ctx.doc.contains("constancy_tol")) {
    const double tol = ctx.doc["constancy_tol"].get<double>();
    const bool ok = scan.constancy_deviation <= tol;
    report["verdict"] = ok ? "m(t) constant within tolerance" : "constancy violated";
    return ok ? kExitPass : kExitCheckFail;
  }
  report["verdict"] = "scan complete";
  return kExitPass;
}

int run_pontryagin(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const LinearFunctional functional =
      io::functional_from_json(ctx.doc.at("functional"), ctx.dim);
  const ControlFamily family = parse_family(ctx);
  const std::vector<double> t_grid = ctx.doc.at("t_grid").get<std::vector<double>>();
  const double slack = ctx.doc.value("slack", 1e-3);

  const PontryaginReport r =
      pontryagin_check(functional, field, family, t_grid, slack, ctx.integ, ctx.limit);

  CsvWriter csv(ctx.table_path("pontryagin"),
                {"t", "m", "field_value", "slack", "zeta_re", "zeta_im"});
  for (const PontryaginRow& row : r.rows) {
    csv.row({format_double(row.t), format_double(row.m), format_double(row.field_value),
             format_double(row.slack), format_double(row.maximizer.zeta.real()),
             format_double(row.maximizer.zeta.imag())});
  }
  report["pass"] = r.pass;
  report["slack_allowed"] = r.slack_allowed;
  report["worst_violation"] = r.worst_violation;
  report["worst_t"] = r.worst_t;
  Json witness;
  witness["zeta"] = io::complex_to_json(r.worst_witness.zeta);
  witness["label"] = r.worst_witness.label;
  witness["value"] = io::complex_to_json(r.worst_witness.value);
  report["witness"] = std::move(witness);
  report["tables"] = Json::array({csv.path().filename().string()});
  report["verdict"] = r.pass ? "maximum principle holds on the grid"
                             : "maximum principle violated";
  return r.pass ? kExitPass : kExitCheckFail;
}

int run_pommerenke(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const LinearFunctional functional =
      io::functional_from_json(ctx.doc.at("functional"), ctx.dim);
  const ControlFamily family = parse_family(ctx);
  const double t_limit = ctx.doc.value("t_limit", 20.0);
  const double tol = ctx.doc.value("tol", 1e-4);

  const PommerenkeReport r =
      pommerenke_check(functional, field, family, t_limit, tol, ctx.integ, ctx.limit);

  CsvWriter csv(ctx.table_path("pommerenke"),
                {"m0", "m_limit", "re_l_target", "limit_deviation", "zero_deviation"});
  csv.row({format_double(r.m0), format_double(r.m_limit),
           format_double(r.re_l_target), format_double(r.limit_deviation),
           format_double(r.zero_deviation)});
  report["t_limit"] = r.t_limit;
  report["m0"] = r.m0;
  report["m_limit"] = r.m_limit;
  report["re_l_target"] = r.re_l_target;
  report["limit_deviation"] = r.limit_deviation;
  report["zero_deviation"] = r.zero_deviation;
  report["note"] =
      "zero_deviation is certified only when the family contains the true maximizer";
  report["tables"] = Json::array({csv.path().filename().string()});
  report["verdict"] = r.limit_ok ? "transport limit matches -Re L(F)"
                                 : "transport limit check failed";
  return r.limit_ok ? kExitPass : kExitCheckFail;
}

int run_screen(const Context& ctx, Json& report) {
  const HerglotzField field = parse_field(ctx);
  const double T = ctx.doc.at("T").get<double>();
  const double margin = ctx.doc.value("margin", 1e-6);

  const ScreenResult r = support_screen(field, T, boundary_refined_grid(), margin);
  CsvWriter csv(ctx.table_path("screen"), {"T", "sup_value", "fires"});
  csv.row({format_double(r.T), format_double(r.sup_value), r.fires ? "1" : "0"});

  report["T"] = r.T;
  report["sup_value"] = r.sup_value;
  report["margin"] = r.margin;
  report["fires"] = r.fires;
  report["sup_point"] = io::vector_to_json(r.sup_point);
  report["tables"] = Json::array({csv.path().filename().string()});
  report["verdict"] = r.fires
                          ? "fires: the scaled flow is not extremal beyond T"
                          : "no firing: screen inconclusive";
  return kExitPass;
}

}  // namespace

int run_scenario(const std::filesystem::path& scenario_path,
                 const std::optional<std::filesystem::path>& out_dir,
                 const RunOverrides& overrides) {
  Context ctx;
  std::string task;
  try {
    std::ifstream in(scenario_path);
    if (!in) {
      std::cerr << "error: cannot read " << scenario_path << "\n";
      return kExitBadInput;
    }
    ctx.doc = Json::parse(in);
    require(ctx.doc.is_object(), "scenario must be a JSON object");
    require(ctx.doc.contains("task"), "scenario needs a task");
    task = ctx.doc["task"].get<std::string>();
    if (overrides.expected_task && task != *overrides.expected_task)
      throw std::invalid_argument("scenario task '" + task +
                                  "' does not match subcommand '" +
                                  *overrides.expected_task + "'");
    ctx.dim = ctx.doc.value("dimension", 1);
    require(ctx.dim >= 1, "dimension must be >= 1");
    ctx.name = sanitize(ctx.doc.value("name", scenario_path.stem().string()));
    ctx.out_dir = out_dir.value_or(scenario_path.parent_path());
    if (ctx.out_dir.empty()) ctx.out_dir = ".";
    std::filesystem::create_directories(ctx.out_dir);

    if (ctx.doc.contains("tolerances")) {
      const Json& tols = ctx.doc["tolerances"];
      ctx.integ.abs_tol = tols.value("abs", ctx.integ.abs_tol);
      ctx.integ.rel_tol = tols.value("rel", ctx.integ.rel_tol);
      require(ctx.integ.abs_tol > 0 && ctx.integ.rel_tol > 0,
              "tolerances must be positive");
    }
    if (overrides.abs_tol) ctx.integ.abs_tol = *overrides.abs_tol;
    if (overrides.rel_tol) ctx.integ.rel_tol = *overrides.rel_tol;
    ctx.integ.threads = overrides.threads.value_or(ctx.doc.value("threads", 1));
    ctx.limit.integ = ctx.integ;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitBadInput;
  }

  Json report;
  report["name"] = ctx.name;
  report["task"] = task;
  report["dimension"] = ctx.dim;
  int code = kExitPass;
  try {
    log_info("running task " + task);
    if (task == "flow") {
      code = run_flow(ctx, report);
    } else if (task == "map") {
      code = run_map(ctx, report);
    } else if (task == "membership") {
      code = run_membership(ctx, report);
    } else if (task == "vary") {
      code = run_vary(ctx, report);
    } else if (task == "hamiltonian") {
      code = run_hamiltonian(ctx, report);
    } else if (task == "pontryagin") {
      code = run_pontryagin(ctx, report);
    } else if (task == "pommerenke") {
      code = run_pommerenke(ctx, report);
    } else if (task == "screen") {
      code = run_screen(ctx, report);
    } else {
      std::cerr << "error: unknown task '" << task << "'\n";
      return kExitBadInput;
    }
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& ex) {
    report["error"] = ex.what();
    report["verdict"] = "numerical failure";
    finish(ctx, report);
    std::cerr << "error: " << ex.what() << "\n";
    return kExitCheckFail;
  }

  finish(ctx, report);
  std::cout << ctx.name << ": " << report.value("verdict", "done") << "\n";
  return code;
}

}  // namespace loewner
