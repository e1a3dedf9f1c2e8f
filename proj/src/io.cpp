#include "loewner/io.hpp"

#include <cmath>
#include <cstdio>

namespace loewner::io {

std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_complex(Cplx z) {
  std::string s = format_double(z.real());
  s += (z.imag() < 0.0 ? "" : "+");
  s += format_double(z.imag());
  s += "i";
  return s;
}

Json complex_to_json(Cplx z) { return Json::array({z.real(), z.imag()}); }

Cplx complex_from_json(const Json& j) {
  if (j.is_number()) return Cplx(j.get<double>(), 0.0);
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          "complex values are [re, im] pairs");
  return Cplx(j[0].get<double>(), j[1].get<double>());
}

Json vector_to_json(const CVec& z) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(complex_to_json(z[i]));
  return out;
}

CVec vector_from_json(const Json& j, int expected_dim) {
  require(j.is_array() && !j.empty(), "points are arrays of [re, im] pairs");
  CVec z(j.size());
  for (size_t i = 0; i < j.size(); ++i) z[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
  if (expected_dim >= 0)
    require(z.size() == expected_dim, "point dimension mismatch");
  return z;
}

Json jet_to_json(const Jet& jet) {
  Json terms = Json::array();
  for (int k = 0; k < jet.dim(); ++k) {
    for (int col = 0; col < jet.basis().size(); ++col) {
      const Cplx c = jet.table()(k, col);
      if (c == Cplx(0, 0)) continue;
      Json term;
      term["component"] = k + 1;
      term["alpha"] = jet.basis().index(col);
      term["re"] = c.real();
      term["im"] = c.imag();
      terms.push_back(std::move(term));
    }
  }
  Json out;
  out["degree"] = jet.degree();
  out["terms"] = std::move(terms);
  return out;
}

Jet jet_from_json(const Json& j, int dim, int min_degree) {
  require(j.contains("terms") && j["terms"].is_array(), "jet needs a terms array");
  int degree = std::max(1, min_degree);
  if (j.contains("degree")) degree = std::max(degree, j["degree"].get<int>());
  for (const Json& term : j["terms"]) {
    require(term.contains("alpha") && term["alpha"].is_array(), "jet term needs alpha");
    int total = 0;
    for (const Json& e : term["alpha"]) total += e.get<int>();
    degree = std::max(degree, total);
  }
  Jet jet(dim, degree);
  for (const Json& term : j["terms"]) {
    MultiIndex alpha = term["alpha"].get<MultiIndex>();
    require(static_cast<int>(alpha.size()) == dim, "jet term alpha dimension mismatch");
    const int component = term.value("component", 1) - 1;
    const double re = term.value("re", 0.0);
    const double im = term.value("im", 0.0);
    jet.add_coeff(component, alpha, Cplx(re, im));
  }
  return jet;
}

Json descriptor_to_json(const MapDescriptor& m) {
  Json out;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearRadial>) {
          out["kind"] = "linear_radial";
        } else if constexpr (std::is_same_v<T, SliceMoebius>) {
          out["kind"] = "slice_moebius";
          out["zeta"] = complex_to_json(v.zeta);
          out["u"] = vector_to_json(v.u);
        } else if constexpr (std::is_same_v<T, PolyJet>) {
          out["kind"] = "poly_jet";
          Json jet = jet_to_json(v.jet);
          out["degree"] = jet["degree"];
          out["terms"] = jet["terms"];
        } else {
          out["kind"] = "convex";
          out["weights"] = v.weights;
          Json parts = Json::array();
          for (const auto& p : v.parts) parts.push_back(descriptor_to_json(p));
          out["parts"] = std::move(parts);
        }
      },
      m.payload());
  return out;
}

MapDescriptor descriptor_from_json(const Json& j, int dim) {
  require(j.is_object() && j.contains("kind"), "descriptor needs a kind field");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "linear_radial") {
    return MapDescriptor::linear_radial(dim);
  }
  if (kind == "slice_moebius") {
    require(j.contains("zeta"), "slice_moebius needs zeta");
    const Cplx zeta = complex_from_json(j["zeta"]);
    if (j.contains("u")) return MapDescriptor::slice_moebius(zeta, vector_from_json(j["u"], dim));
    require(dim == 1, "slice_moebius needs u when dimension > 1");
    return MapDescriptor::slice_moebius(zeta);
  }
  if (kind == "poly_jet") {
    return MapDescriptor::poly(jet_from_json(j, dim));
  }
  if (kind == "convex") {
    require(j.contains("weights") && j.contains("parts"), "convex needs weights and parts");
    std::vector<MapDescriptor> parts;
    for (const Json& p : j["parts"]) parts.push_back(descriptor_from_json(p, dim));
    return MapDescriptor::convex(j["weights"].get<std::vector<double>>(), std::move(parts));
  }
  throw std::invalid_argument("unknown descriptor kind: " + kind);
}

Json field_to_json(const HerglotzField& g) {
  Json out;
  out["breakpoints"] = g.breakpoints();
  Json pieces = Json::array();
  for (const auto& p : g.pieces()) pieces.push_back(descriptor_to_json(p));
  out["pieces"] = std::move(pieces);
  return out;
}

HerglotzField field_from_json(const Json& j, int dim) {
  require(j.is_object(), "field must be an object");
  if (j.contains("kind")) {
    // bare descriptor: constant-in-time field
    return HerglotzField::constant(descriptor_from_json(j, dim));
  }
  require(j.contains("breakpoints") && j.contains("pieces"),
          "field needs breakpoints and pieces");
  std::vector<MapDescriptor> pieces;
  for (const Json& p : j["pieces"]) pieces.push_back(descriptor_from_json(p, dim));
  return HerglotzField(j["breakpoints"].get<std::vector<double>>(), std::move(pieces));
}

Json functional_to_json(const LinearFunctional& l) {
  Json atoms = Json::array();
  for (const PointAtom& a : l.point_atoms()) {
    Json atom;
    atom["type"] = "point";
    atom["z"] = vector_to_json(a.z);
    atom["component"] = a.component + 1;
    atom["weight"] = complex_to_json(a.weight);
    atoms.push_back(std::move(atom));
  }
  for (const CoeffAtom& a : l.coeff_atoms()) {
    Json atom;
    atom["type"] = "coeff";
    atom["alpha"] = a.alpha;
    atom["component"] = a.component + 1;
    atom["weight"] = complex_to_json(a.weight);
    atoms.push_back(std::move(atom));
  }
  Json out;
  out["atoms"] = std::move(atoms);
  return out;
}

LinearFunctional functional_from_json(const Json& j, int dim) {
  require(j.is_object() && j.contains("atoms") && j["atoms"].is_array() &&
              !j["atoms"].empty(),
          "functional needs a nonempty atoms array");
  std::vector<PointAtom> point_atoms;
  std::vector<CoeffAtom> coeff_atoms;
  for (const Json& atom : j["atoms"]) {
    const std::string type = atom.value("type", "point");
    const Cplx weight =
        atom.contains("weight") ? complex_from_json(atom["weight"]) : Cplx(1, 0);
    const int component = atom.value("component", 1) - 1;
    if (type == "point") {
      require(atom.contains("z"), "point atom needs z");
      point_atoms.push_back(PointAtom{vector_from_json(atom["z"], dim), component, weight});
    } else if (type == "coeff") {
      require(atom.contains("alpha"), "coeff atom needs alpha");
      MultiIndex alpha = atom["alpha"].get<MultiIndex>();
      require(static_cast<int>(alpha.size()) == dim, "coeff atom alpha dimension mismatch");
      coeff_atoms.push_back(CoeffAtom{std::move(alpha), component, weight});
    } else {
      throw std::invalid_argument("unknown atom type: " + type);
    }
  }
  return LinearFunctional(dim, std::move(point_atoms), std::move(coeff_atoms));
}

Json family_to_json(const ControlFamily& f) {
  Json out;
  if (f.is_grid()) {
    out["kind"] = "slice_grid";
    out["zeta_count"] = f.grid().zeta_count;
    out["refine"] = f.grid().refine;
    out["u_count"] = f.grid().u_count;
  } else {
    out["kind"] = "list";
    Json items = Json::array();
    for (const auto& m : f.items()) items.push_back(descriptor_to_json(m));
    out["items"] = std::move(items);
  }
  return out;
}

ControlFamily family_from_json(const Json& j, int dim) {
  require(j.is_object() && j.contains("kind"), "family needs a kind field");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "slice_grid") {
    ControlFamily::SliceGrid grid;
    grid.zeta_count = j.value("zeta_count", 256);
    grid.refine = j.value("refine", true);
    grid.refine_tol = j.value("refine_tol", 1e-6);
    grid.u_count = j.value("u_count", 64);
    return ControlFamily::slice_grid(grid);
  }
  if (kind == "list") {
    require(j.contains("items") && j["items"].is_array() && !j["items"].empty(),
            "family list needs items");
    std::vector<MapDescriptor> items;
    for (const Json& m : j["items"]) items.push_back(descriptor_from_json(m, dim));
    return ControlFamily::explicit_list(std::move(items));
  }
  throw std::invalid_argument("unknown family kind: " + kind);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

std::vector<std::string> point_header(const std::string& prefix, int dim) {
  std::vector<std::string> h;
  for (int k = 1; k <= dim; ++k) {
    h.push_back(prefix + std::to_string(k) + "_re");
    h.push_back(prefix + std::to_string(k) + "_im");
  }
  return h;
}

std::vector<std::string> point_cells(const CVec& z) {
  std::vector<std::string> cells;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    cells.push_back(format_double(z[i].real()));
    cells.push_back(format_double(z[i].imag()));
  }
  return cells;
}

namespace {

void render_inline(const Json& j, std::string& out) {
  if (j.is_array()) {
    out += "[";
    for (size_t i = 0; i < j.size(); ++i) {
      if (i) out += ", ";
      render_inline(j[i], out);
    }
    out += "]";
  } else if (j.is_number_float()) {
    out += format_double(j.get<double>());
  } else {
    out += j.dump();
  }
}

bool needs_block(const Json& j) {
  if (j.is_object()) return true;
  if (!j.is_array()) return false;
  for (const Json& item : j)
    if (item.is_object()) return true;
  return false;
}

void render_object(const Json& j, std::string& out, int indent);

void render_array(const Json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  for (const Json& item : j) {
    if (item.is_object()) {
      out += pad;
      out += "-\n";
      render_object(item, out, indent + 1);
    } else {
      out += pad;
      out += "- ";
      render_inline(item, out);
      out += "\n";
    }
  }
}

void render_object(const Json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  for (auto it = j.begin(); it != j.end(); ++it) {
    out += pad;
    out += it.key();
    out += ":";
    if (needs_block(*it)) {
      out += "\n";
      if (it->is_object()) {
        render_object(*it, out, indent + 1);
      } else {
        render_array(*it, out, indent + 1);
      }
    } else {
      out += " ";
      render_inline(*it, out);
      out += "\n";
    }
  }
}

}  // namespace

std::string render_report(const Json& j) {
  std::string out;
  if (j.is_object()) {
    render_object(j, out, 0);
  } else {
    render_inline(j, out);
    out += "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

}  // namespace loewner::io
