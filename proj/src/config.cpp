#include "slicekit/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "slicekit/runner.hpp"

namespace slicekit {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>>& section_keys() {
  // kind -> (required, optional); check sections accept any argument key.
  static const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> keys = {
      {"space", {{"coords"}, {"periods", "bounds", "constraints"}}},
      {"system", {{"space", "field"}, {}}},
      {"symplectic", {{"space", "omega", "hamiltonian"}, {}}},
      {"poisson", {{"space", "lambda", "hamiltonian"}, {}}},
      {"map", {{"source", "target", "components"}, {}}},
      {"slicing", {{"map"}, {"field"}}},
      {"complete", {{"base", "parameters", "target", "family"}, {"inverse", "fields"}}},
      {"fibration", {{"projection"}, {"adapted"}}},
      {"sode", {{"space", "functions"}, {}}},
      {"check", {{"op"}, {}}},
  };
  return keys;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> expression_texts(const std::vector<Expression>& es) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(e.to_string());
  return out;
}

std::string matrix_text(const BilinearFormField& f) {
  std::vector<std::string> rows;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < f.size(); ++j) row.push_back(f.entry(i, j).to_string());
    rows.push_back(join(row, "; "));
  }
  return join(rows, " | ");
}

std::vector<std::vector<std::string>> parse_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : split_list(text, '|')) rows.push_back(split_list(row, ';'));
  return rows;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<Interval> parse_bounds(std::string_view text) {
  std::vector<Interval> out;
  for (const auto& item : split_list(text)) {
    // Split on whitespace outside parentheses: "0 2*atan2(0, -1)".
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    for (char ch : item) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (depth == 0 && std::isspace(static_cast<unsigned char>(ch))) {
        if (!cur.empty()) parts.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    if (parts.size() != 2) throw ConfigError("bounds entries read 'lo hi', got '" + item + "'");
    out.push_back({parse_real(parts[0]), parse_real(parts[1])});
  }
  return out;
}

double parse_real(std::string_view text) {
  const Expression e = Expression::parse(text, {});
  return e.evaluate(Vector());
}

std::vector<ConfigSection> parse_sections(std::string_view text) {
  std::vector<ConfigSection> sections;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string inner = trim(std::string_view(line).substr(1, line.size() - 2));
      const auto sp = inner.find_first_of(" \t");
      if (sp == std::string::npos) throw ConfigError(where + "section header needs a kind and a name");
      ConfigSection s;
      s.kind = inner.substr(0, sp);
      s.name = trim(std::string_view(inner).substr(sp));
      s.line = line_no;
      if (!section_keys().count(s.kind)) throw ConfigError(where + "unknown section kind '" + s.kind + "'");
      if (!valid_name(s.name)) throw ConfigError(where + "invalid section name '" + s.name + "'");
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (sections.empty()) throw ConfigError(where + "entry outside any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_name(key)) throw ConfigError(where + "invalid key '" + key + "'");
    auto& entries = sections.back().entries;
    for (const auto& [k, v] : entries) {
      if (k == key) throw ConfigError(where + "duplicate key '" + key + "'");
    }
    entries.emplace_back(key, value);
  }
  return sections;
}

std::string write_sections(const std::vector<ConfigSection>& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i) out += '\n';
    out += "[" + sections[i].kind + " " + sections[i].name + "]\n";
    for (const auto& [k, v] : sections[i].entries) out += k + " = " + v + "\n";
  }
  return out;
}

Definition Definition::parse(std::string_view text) {
  Definition def;
  std::set<std::string> names;
  std::set<std::string> check_names;
  for (const auto& section : parse_sections(text)) {
    const std::string where = "[" + section.kind + " " + section.name + "] (line " + std::to_string(section.line) + ")";
    if (!(section.kind == "check" ? check_names : names).insert(section.name).second) throw ConfigError(where + ": duplicate name '" + section.name + "'");
    if (section.kind != "check") {
      const auto& [required, optional] = section_keys().at(section.kind);
      std::set<std::string> seen;
      for (const auto& [k, v] : section.entries) {
        if (!required.count(k) && !optional.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
        seen.insert(k);
      }
      for (const auto& k : required) {
        if (!seen.count(k)) throw ConfigError(where + ": missing key '" + k + "'");
      }
    }
    try {
      def.add(section);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return def;
}

Definition Definition::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read system file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Definition::add(const ConfigSection& section) {
  std::map<std::string, std::string> e(section.entries.begin(), section.entries.end());
  const auto get = [&](const std::string& k) -> const std::string& { return e.at(k); };
  const auto has = [&](const std::string& k) { return e.count(k) != 0; };
  const std::string& name = section.name;
  const std::string& kind = section.kind;

  if (kind == "space") {
    auto s = std::make_shared<CoordinateSpace>(name, split_list(get("coords")));
    if (has("periods")) {
      for (const auto& item : split_list(get("periods"))) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("period entries read 'coordinate: value'");
        const auto idx = s->index_of(trim(std::string_view(item).substr(0, colon)));
        if (!idx) throw ConfigError("period for unknown coordinate in '" + item + "'");
        s->set_period(*idx, parse_real(std::string_view(item).substr(colon + 1)));
      }
    }
    if (has("bounds")) s->set_bounds(parse_bounds(get("bounds")));
    if (has("constraints")) {
      for (const auto& c : split_list(get("constraints"))) s->add_constraint(c);
    }
    spaces_.emplace(name, s);
  } else if (kind == "system") {
    const SpaceRef sp = space(get("space"));
    systems_.emplace(name, DynamicalSystem(sp, VectorField::parse(name, sp, split_list(get("field")))));
  } else if (kind == "symplectic") {
    const SpaceRef sp = space(get("space"));
    BilinearFormField omega = BilinearFormField::parse("omega_" + name, sp, FormKind::symplectic, parse_rows(get("omega")));
    symplectic_.emplace(name, SymplecticSystem(name, std::move(omega), Expression::parse(get("hamiltonian"), sp->coordinates())));
  } else if (kind == "poisson") {
    const SpaceRef sp = space(get("space"));
    BilinearFormField lambda = BilinearFormField::parse("lambda_" + name, sp, FormKind::poisson, parse_rows(get("lambda")));
    poisson_.emplace(name, PoissonSystem(name, std::move(lambda), Expression::parse(get("hamiltonian"), sp->coordinates())));
  } else if (kind == "map") {
    maps_.emplace(name, SmoothMap::parse(name, space(get("source")), space(get("target")), split_list(get("components"))));
  } else if (kind == "slicing") {
    const SmoothMap& m = map(get("map"));
    std::optional<VectorField> field;
    if (has("field")) field = VectorField::parse("X_" + name, m.source(), split_list(get("field")));
    slicings_.emplace(name, Slicing{m, std::move(field)});
  } else if (kind == "complete") {
    const SpaceRef base = space(get("base"));
    const SpaceRef params = space(get("parameters"));
    const SpaceRef target = space(get("target"));
    const SpaceRef product = product_space(base->name() + "x" + params->name(), *base, *params);
    SmoothMap family = SmoothMap::parse("abar_" + name, product, target, split_list(get("family")));
    std::optional<SmoothMap> inverse;
    if (has("inverse")) inverse = SmoothMap::parse("inv_" + name, target, product, split_list(get("inverse")));
    std::optional<SmoothMap> fields;
    if (has("fields")) fields = SmoothMap::parse("X_" + name, product, base, split_list(get("fields")));
    completes_.emplace(name, CompleteSlicing(base, params, std::move(family), std::move(inverse), std::move(fields)));
  } else if (kind == "fibration") {
    std::optional<Eigen::Index> adapted;
    if (has("adapted")) adapted = static_cast<Eigen::Index>(parse_real(get("adapted")));
    fibrations_.emplace(name, FibredStructure(map(get("projection")), adapted));
  } else if (kind == "sode") {
    const SpaceRef sp = space(get("space"));
    std::vector<Expression> fs;
    for (const auto& t : split_list(get("functions"))) fs.push_back(Expression::parse(t, sp->coordinates()));
    TangentBundleSpace tb(sp);
    if (static_cast<Eigen::Index>(fs.size()) != tb.m()) throw ConfigError("sode needs exactly m functions");
    sodes_.emplace(name, SodeDefinition{std::move(tb), std::move(fs)});
  } else if (kind == "check") {
    CheckSpec spec;
    spec.name = name;
    for (const auto& [k, v] : section.entries) {
      if (k == "op") {
        spec.op = v;
      } else if (k == "expect") {
        if (v != "pass" && v != "fail") throw ConfigError("expect must be 'pass' or 'fail'");
        spec.expect = v == "pass";
      } else if (k == "citation") {
        spec.citation = v;
      } else {
        spec.args.emplace(k, v);
      }
    }
    validate_check(spec);
    checks_.push_back(std::move(spec));
  }
  order_.emplace_back(kind, name);
}

std::string Definition::serialize() const {
  std::vector<ConfigSection> out;
  std::size_t check_index = 0;
  for (const auto& [kind, name] : order_) {
    ConfigSection s;
    s.kind = kind;
    s.name = name;
    auto put = [&](std::string k, std::string v) { s.entries.emplace_back(std::move(k), std::move(v)); };
    if (kind == "space") {
      const auto& sp = *spaces_.at(name);
      put("coords", join(sp.coordinates(), "; "));
      std::vector<std::string> periods;
      for (std::size_t i = 0; i < sp.coordinates().size(); ++i) {
        if (sp.period(i)) periods.push_back(sp.coordinates()[i] + ": " + format_real(*sp.period(i)));
      }
      if (!periods.empty()) put("periods", join(periods, "; "));
      if (!sp.bounds().empty()) {
        std::vector<std::string> b;
        for (const auto& iv : sp.bounds()) b.push_back(format_real(iv.lo) + " " + format_real(iv.hi));
        put("bounds", join(b, "; "));
      }
      if (!sp.constraints().empty()) {
        std::vector<std::string> c;
        for (const auto& dc : sp.constraints()) c.push_back(dc.text);
        put("constraints", join(c, "; "));
      }
    } else if (kind == "system") {
      const auto& sys = systems_.at(name);
      put("space", sys.space->name());
      put("field", join(expression_texts(sys.field.components()), "; "));
    } else if (kind == "symplectic") {
      const auto& sys = symplectic_.at(name);
      put("space", sys.space()->name());
      put("omega", matrix_text(sys.omega()));
      put("hamiltonian", sys.hamiltonian().to_string());
    } else if (kind == "poisson") {
      const auto& sys = poisson_.at(name);
      put("space", sys.space()->name());
      put("lambda", matrix_text(sys.lambda()));
      put("hamiltonian", sys.hamiltonian().to_string());
    } else if (kind == "map") {
      const auto& m = maps_.at(name);
      put("source", m.source()->name());
      put("target", m.target()->name());
      put("components", join(expression_texts(m.components()), "; "));
    } else if (kind == "slicing") {
      const auto& sl = slicings_.at(name);
      put("map", sl.map.name());
      if (sl.field) put("field", join(expression_texts(sl.field->components()), "; "));
    } else if (kind == "complete") {
      const auto& cs = completes_.at(name);
      put("base", cs.base()->name());
      put("parameters", cs.parameters->name());
      put("target", cs.target()->name());
      put("family", join(expression_texts(cs.family.components()), "; "));
      if (cs.inverse) put("inverse", join(expression_texts(cs.inverse->components()), "; "));
      if (cs.fields) put("fields", join(expression_texts(cs.fields->components()), "; "));
    } else if (kind == "fibration") {
      const auto& f = fibrations_.at(name);
      put("projection", f.projection().name());
      if (f.adapted_base_dim()) put("adapted", std::to_string(*f.adapted_base_dim()));
    } else if (kind == "sode") {
      const auto& sd = sodes_.at(name);
      put("space", sd.bundle.space()->name());
      put("functions", join(expression_texts(sd.functions), "; "));
    } else if (kind == "check") {
      const auto& c = checks_.at(check_index++);
      put("op", c.op);
      for (const auto& [k, v] : c.args) put(k, v);
      if (c.expect) put("expect", *c.expect ? "pass" : "fail");
      if (!c.citation.empty()) put("citation", c.citation);
    }
    out.push_back(std::move(s));
  }
  return write_sections(out);
}

namespace {

template <typename M>
const typename M::mapped_type& lookup(const M& m, const std::string& name, const char* what) {
  const auto it = m.find(name);
  if (it == m.end()) throw ConfigError(std::string("unknown ") + what + " '" + name + "'");
  return it->second;
}

}  // namespace

SpaceRef Definition::space(const std::string& name) const { return lookup(spaces_, name, "space"); }
const SmoothMap& Definition::map(const std::string& name) const { return lookup(maps_, name, "map"); }
const Slicing& Definition::slicing(const std::string& name) const { return lookup(slicings_, name, "slicing"); }
const CompleteSlicing& Definition::complete(const std::string& name) const {
  return lookup(completes_, name, "complete slicing");
}
const FibredStructure& Definition::fibration(const std::string& name) const {
  return lookup(fibrations_, name, "fibration");
}
const SymplecticSystem& Definition::symplectic(const std::string& name) const {
  return lookup(symplectic_, name, "symplectic system");
}
const PoissonSystem& Definition::poisson(const std::string& name) const {
  return lookup(poisson_, name, "poisson system");
}
const SodeDefinition& Definition::sode(const std::string& name) const { return lookup(sodes_, name, "sode"); }

DynamicalSystem Definition::dynamics(const std::string& name) const {
  if (const auto it = systems_.find(name); it != systems_.end()) return it->second;
  if (const auto it = symplectic_.find(name); it != symplectic_.end()) {
    return DynamicalSystem(it->second.space(), hamiltonian_vector_field(it->second));
  }
  if (const auto it = poisson_.find(name); it != poisson_.end()) {
    return DynamicalSystem(it->second.space(), hamiltonian_vf_poisson(it->second));
  }
  if (const auto it = sodes_.find(name); it != sodes_.end()) {
    return DynamicalSystem(it->second.bundle.space(), sode_field(it->second.bundle, it->second.functions, name));
  }
  throw ConfigError("unknown dynamical system '" + name + "'");
}

const CheckSpec& Definition::check(const std::string& name) const {
  for (const auto& c : checks_) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown check '" + name + "'");
}

}  // namespace slicekit
