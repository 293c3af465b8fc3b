#include "slicekit/runner.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace slicekit {

namespace {

const std::vector<std::string> kCommonArgs = {"tolerance", "samples", "seed", "strategy", "bounds"};

struct Context {
  const Definition& def;
  const CheckSpec& spec;
  double tolerance;
  SamplePlan plan;

  const std::string& arg(const std::string& key) const {
    const auto it = spec.args.find(key);
    if (it == spec.args.end()) throw ConfigError("check '" + spec.name + "' needs argument '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return spec.args.count(key) != 0; }
  double real(const std::string& key, double fallback) const { return has(key) ? parse_real(arg(key)) : fallback; }

  std::vector<Expression> expressions(const std::string& key, const CoordinateSpace& space) const {
    std::vector<Expression> out;
    for (const auto& t : split_list(arg(key))) out.push_back(Expression::parse(t, space.coordinates()));
    return out;
  }
};

using Runner = std::function<CheckReport(const Context&)>;

struct Operation {
  OperationInfo info;
  Runner run;
};

ConstantCheckOptions constant_options(const Context& c) {
  ConstantCheckOptions o;
  o.tolerance = c.tolerance;
  o.horizon = c.real("horizon", o.horizon);
  o.integrator_tolerance = c.real("integrator_tolerance", o.integrator_tolerance);
  if (c.has("checkpoints")) o.checkpoints = static_cast<std::size_t>(c.real("checkpoints", 0));
  return o;
}

VectorField slicing_field(const Slicing& s, const VectorField& z) {
  if (s.field) return *s.field;
  const Slicing copy = s;
  const VectorField zc = z;
  return VectorField("X_" + s.map.name(), s.base(), [copy, zc](const Vector& x) { return slicing_field_at(copy, zc, x); });
}

const std::vector<Operation>& table() {
  static const std::vector<Operation> ops = [] {
    std::vector<Operation> v = {
        {{"check-slicing", "slicing residual J X - Z(alpha)", {"dynamics", "slicing"}, {}},
         [](const Context& c) {
           return check_slicing(c.def.slicing(c.arg("slicing")), c.def.dynamics(c.arg("dynamics")).field, c.plan,
                                c.tolerance);
         }},
        {{"check-complete", "slicing residual over a complete family", {"dynamics", "complete"}, {"coverage"}},
         [](const Context& c) {
           const CompleteSlicing& cs = c.def.complete(c.arg("complete"));
           CompleteCheckOptions o;
           o.tolerance = c.tolerance;
           if (c.has("coverage")) {
             SamplePlan cov;
             cov.count = static_cast<std::size_t>(c.real("coverage", 0));
             cov.seed = c.plan.seed;
             o.coverage = cov;
           }
           return check_complete_slicing(cs, c.def.dynamics(c.arg("dynamics")).field, c.plan, o);
         }},
        {{"check-constant",
          "constant of the motion, infinitesimal or integral",
          {"dynamics", "constant"},
          {"mode", "horizon", "integrator_tolerance", "checkpoints"}},
         [](const Context& c) {
           const std::string mode = c.has("mode") ? c.arg("mode") : "infinitesimal";
           if (mode != "infinitesimal" && mode != "integral") throw ConfigError("mode must be infinitesimal or integral");
           return check_constant_of_motion(c.def.dynamics(c.arg("dynamics")), c.def.map(c.arg("constant")), c.plan,
                                           mode == "integral" ? ConstantMode::integral : ConstantMode::infinitesimal,
                                           constant_options(c));
         }},
        {{"constant-from-complete",
          "constant of the motion read off a complete slicing",
          {"dynamics", "complete"},
          {"horizon", "integrator_tolerance", "checkpoints"}},
         [](const Context& c) {
           return constant_from_complete(c.def.complete(c.arg("complete")), c.def.dynamics(c.arg("dynamics")), c.plan,
                                         constant_options(c))
               .report;
         }},
        {{"tangency", "Z tangent to the image of a map", {"dynamics", "map"}, {}},
         [](const Context& c) {
           return check_tangency(c.def.dynamics(c.arg("dynamics")).field, c.def.map(c.arg("map")), c.plan, c.tolerance)
               .report;
         }},
        {{"hj-residual", "i_X alpha^*omega - d(alpha^*H)", {"symplectic", "slicing"}, {}},
         [](const Context& c) {
           const SymplecticSystem& sys = c.def.symplectic(c.arg("symplectic"));
           const Slicing& s = c.def.slicing(c.arg("slicing"));
           return check_hj(sys, s.map, slicing_field(s, hamiltonian_vector_field(sys)), c.plan, c.tolerance);
         }},
        {{"classify", "isotropic / coisotropic / Lagrangian image", {"symplectic", "map"}, {"kind"}},
         [](const Context& c) {
           Classification cl = classify_submanifold(c.def.symplectic(c.arg("symplectic")), c.def.map(c.arg("map")),
                                                    c.plan, c.tolerance);
           CheckReport r = std::move(cl.report);
           if (c.has("kind")) {
             const std::string want = c.arg("kind");
             r.pass = to_string(cl.kind) == want;
             if (!r.pass) r.notes.push_back("expected kind " + want + ", found " + to_string(cl.kind));
           }
           return r;
         }},
        {{"lagrangian-slicing", "d(alpha^*H) on a Lagrangian image", {"symplectic", "map"}, {}},
         [](const Context& c) {
           return check_lagrangian_slicing(c.def.symplectic(c.arg("symplectic")), c.def.map(c.arg("map")), c.plan,
                                           c.tolerance);
         }},
        {{"check-fibred", "fibred slicing residual with X = T pi Z(alpha)", {"dynamics", "fibration", "section"}, {}},
         [](const Context& c) {
           return check_fibred_slicing(c.def.fibration(c.arg("fibration")), c.def.map(c.arg("section")),
                                       c.def.dynamics(c.arg("dynamics")).field, c.plan, c.tolerance);
         }},
        {{"fibre-isotropy", "omega restricted to the fibres", {"symplectic", "fibration"}, {}},
         [](const Context& c) {
           return check_fibre_isotropy(c.def.fibration(c.arg("fibration")), c.def.symplectic(c.arg("symplectic")),
                                       c.plan, c.tolerance);
         }},
        {{"fibred-hj", "HJ residual with the induced field, isotropic fibres", {"symplectic", "fibration", "section"}, {}},
         [](const Context& c) {
           return fibred_hj_check(c.def.fibration(c.arg("fibration")), c.def.symplectic(c.arg("symplectic")),
                                  c.def.map(c.arg("section")), c.plan, c.tolerance);
         }},
        {{"classical-hj", "grad_q H(q, grad W(q)) on a split cotangent layout", {"symplectic", "base", "generating"}, {}},
         [](const Context& c) {
           const SymplecticSystem& sys = c.def.symplectic(c.arg("symplectic"));
           const Expression w = Expression::parse(c.arg("generating"), sys.space()->coordinates());
           return classical_hj_check(sys, c.def.space(c.arg("base")), w, c.plan, c.tolerance);
         }},
        {{"involution", "pairwise brackets of functions", {"structure", "functions"}, {}},
         [](const Context& c) {
           const std::string& name = c.arg("structure");
           if (c.def.has_symplectic(name)) {
             const SymplecticSystem& sys = c.def.symplectic(name);
             return involution_check(sys, c.expressions("functions", *sys.space()), c.plan, c.tolerance);
           }
           const PoissonSystem& ps = c.def.poisson(name);
           return involution_check(ps, c.expressions("functions", *ps.space()), c.plan, c.tolerance);
         }},
        {{"jacobi", "Jacobi identity of a bivector", {"poisson"}, {"functions"}},
         [](const Context& c) {
           const PoissonSystem& ps = c.def.poisson(c.arg("poisson"));
           std::vector<Expression> fs;
           if (c.has("functions")) fs = c.expressions("functions", *ps.space());
           return jacobi_check(ps, c.plan, fs, c.tolerance);
         }},
        {{"poisson-lagrangian", "Lambda-hat of the annihilator equals TP0 and C", {"poisson", "map"}, {}},
         [](const Context& c) {
           return poisson_lagrangian_check(c.def.poisson(c.arg("poisson")), c.def.map(c.arg("map")), c.plan,
                                           c.tolerance);
         }},
        {{"poisson-check", "slicing condition on an almost-Poisson manifold", {"poisson", "map"}, {}},
         [](const Context& c) {
           return poisson_slicing_check(c.def.poisson(c.arg("poisson")), c.def.map(c.arg("map")), c.plan, c.tolerance);
         }},
        {{"constant-on-image", "d(alpha^* h) vanishes", {"map", "function"}, {}},
         [](const Context& c) {
           const SmoothMap& m = c.def.map(c.arg("map"));
           return check_constant_on_image(Expression::parse(c.arg("function"), m.target()->coordinates()), m, c.plan,
                                          c.tolerance);
         }},
        {{"second-order", "T tau o Z = Id on a tangent bundle", {"dynamics"}, {}},
         [](const Context& c) {
           const DynamicalSystem sys = c.def.dynamics(c.arg("dynamics"));
           return second_order_check(TangentBundleSpace(sys.space), sys.field, c.plan, c.tolerance);
         }},
        {{"reconstruct-sode", "second-order field preserving m functions", {"sode"}, {}},
         [](const Context& c) {
           const SodeDefinition& sd = c.def.sode(c.arg("sode"));
           return check_sode_reconstruction(sd.bundle, sd.functions, c.plan, c.tolerance);
         }},
        {{"section-field", "X = alpha on sections of a tangent bundle", {"dynamics", "section"}, {}},
         [](const Context& c) {
           const DynamicalSystem sys = c.def.dynamics(c.arg("dynamics"));
           return section_field_check(TangentBundleSpace(sys.space), sys.field, c.def.map(c.arg("section")), c.plan,
                                      c.tolerance);
         }},
        {{"straighten", "complete slicing from the flow through a transversal", {"dynamics", "transversal"},
          {"t_min", "t_max"}},
         [](const Context& c) {
           const DynamicalSystem sys = c.def.dynamics(c.arg("dynamics"));
           StraightenOptions o;
           o.t_min = c.real("t_min", o.t_min);
           o.t_max = c.real("t_max", o.t_max);
           SamplePlan transversal_plan = c.plan;
           transversal_plan.bounds.clear();
           const CompleteSlicing cs = straighten_local(sys, c.def.map(c.arg("transversal")), transversal_plan, o);
           SamplePlan product_plan = c.plan;
           product_plan.bounds.clear();
           CompleteCheckOptions co;
           co.tolerance = c.tolerance;
           CheckReport r = check_complete_slicing(cs, sys.field, product_plan, co);
           r.check = "straighten";
           return r;
         }},
    };
    std::sort(v.begin(), v.end(), [](const Operation& a, const Operation& b) { return a.info.name < b.info.name; });
    return v;
  }();
  return ops;
}

const Operation& find_op(const std::string& name) {
  for (const auto& op : table()) {
    if (op.info.name == name) return op;
  }
  throw ConfigError("unknown operation '" + name + "'");
}

}  // namespace

const std::vector<OperationInfo>& operations() {
  static const std::vector<OperationInfo> infos = [] {
    std::vector<OperationInfo> out;
    for (const auto& op : table()) out.push_back(op.info);
    return out;
  }();
  return infos;
}

const OperationInfo& operation(const std::string& name) { return find_op(name).info; }

void validate_check(const CheckSpec& spec) {
  const OperationInfo& info = find_op(spec.op).info;
  std::set<std::string> allowed(info.required.begin(), info.required.end());
  allowed.insert(info.optional.begin(), info.optional.end());
  allowed.insert(kCommonArgs.begin(), kCommonArgs.end());
  for (const auto& [k, v] : spec.args) {
    if (!allowed.count(k)) throw ConfigError("operation '" + spec.op + "' has no argument '" + k + "'");
  }
  for (const auto& k : info.required) {
    if (!spec.args.count(k)) throw ConfigError("operation '" + spec.op + "' needs argument '" + k + "'");
  }
}

CheckReport run_check(const Definition& def, const CheckSpec& spec, const RunOptions& options) {
  validate_check(spec);
  const Operation& op = find_op(spec.op);
  Context c{def, spec, options.tolerance, {}};
  try {
    c.tolerance = c.real("tolerance", options.tolerance);
    c.plan.count = c.has("samples") ? static_cast<std::size_t>(c.real("samples", 0)) : options.samples;
    c.plan.seed = c.has("seed") ? static_cast<std::uint64_t>(c.real("seed", 0)) : options.seed;
    if (c.has("strategy")) {
      const std::string& s = c.arg("strategy");
      if (s != "random" && s != "grid") throw ConfigError("strategy must be random or grid");
      c.plan.strategy = s == "grid" ? SampleStrategy::grid : SampleStrategy::random;
    }
    if (c.has("bounds")) c.plan.bounds = parse_bounds(c.arg("bounds"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("check '" + spec.name + "': " + e.what());
  }

  CheckReport report;
  try {
    report = op.run(c);
  } catch (const PreconditionError& e) {
    report = CheckReport{};
    report.check = spec.op;
    report.tolerance = c.tolerance;
    report.notes.push_back(std::string("precondition failed: ") + e.what());
    report.finalize();
    report.pass = false;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("check '" + spec.name + "': " + e.what());
  }
  if (!spec.citation.empty()) report.citation = spec.citation;
  return report;
}

CheckOutcome run_expected(const Definition& def, const CheckSpec& spec, const RunOptions& options) {
  CheckOutcome out{spec, run_check(def, spec, options), false};
  out.matched = out.report.pass == spec.expect.value_or(true);
  return out;
}

}  // namespace slicekit
