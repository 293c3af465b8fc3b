#include "slicekit/corpus.hpp"

#include <stdexcept>

namespace slicekit {

namespace {

const char* const kRadial = R"(# Radial field on the punctured plane.
[space P]
coords = z1; z2
bounds = -2 2; -2 2
constraints = z1^2 + z2^2 > 0

[space M]
coords = x
bounds = -1 1

[space N]
coords = u
periods = u: 2*atan2(0, -1)
bounds = 0 2*atan2(0, -1)

[space S]
coords = s1; s2

[system radial]
space = P
field = z1; z2

[complete rays]
base = M
parameters = N
target = P
family = exp(x)*cos(u); exp(x)*sin(u)
inverse = ln(z1^2 + z2^2)/2; atan2(z2, z1)
fields = 1

[map direction]
source = P
target = S
components = z1/sqrt(z1^2 + z2^2); z2/sqrt(z1^2 + z2^2)

[map angle]
source = P
target = N
components = atan2(z2, z1)

[check rays-slice]
op = check-complete
dynamics = radial
complete = rays
samples = 20
tolerance = 1e-10
coverage = 200
expect = pass
citation = each ray alpha_u(x) = e^x u is a slicing with X = d/dx

[check direction-drift]
op = check-constant
dynamics = radial
constant = direction
mode = integral
horizon = 5
integrator_tolerance = 1e-10
tolerance = 1e-8
samples = 20
expect = pass
citation = F(z) = z/|z| is a constant of the motion

[check angle-infinitesimal]
op = check-constant
dynamics = radial
constant = angle
expect = pass
citation = the angle is a constant of the motion

[check rays-constant]
op = constant-from-complete
dynamics = radial
complete = rays
expect = pass
citation = a complete slicing yields a constant of the motion
)";

const char* const kHeisenberg = R"(# Heisenberg bivector with H = z(x^2 + y^2)/2.
[space P]
coords = x; y; z
bounds = -2 2; -2 2; -2 2
constraints = z^2 > 0; x^2 + y^2 > 0

[space M]
coords = phi
periods = phi: 2*atan2(0, -1)
bounds = 0 2*atan2(0, -1)

[space N]
coords = r; c
bounds = 0.3 1.5; -1.5 1.5
constraints = r > 0; c^2 > 0

[space RC]
coords = a; b

[poisson heisenberg]
space = P
lambda = 0; -z; 0 | z; 0; 0 | 0; 0; 0
hamiltonian = z*(x^2 + y^2)/2

[complete circles]
base = M
parameters = N
target = P
family = r*cos(phi); r*sin(phi); c
inverse = atan2(y, x); sqrt(x^2 + y^2); z
fields = c^2

[map circle]
source = M
target = P
components = cos(phi); sin(phi); 0.7

[map radius-height]
source = P
target = RC
components = sqrt(x^2 + y^2); z

[check jacobi]
op = jacobi
poisson = heisenberg
expect = pass
citation = the Heisenberg bracket satisfies the Jacobi identity

[check circle-lagrangian]
op = poisson-lagrangian
poisson = heisenberg
map = circle
expect = pass
citation = the circles alpha_{r,c} with c != 0 are Lagrangian

[check circle-slicing]
op = poisson-check
poisson = heisenberg
map = circle
expect = pass
citation = a Lagrangian alpha with alpha^*(dH) in the image of ker Lambda is a slicing

[check circle-energy]
op = constant-on-image
map = circle
function = z*(x^2 + y^2)/2
tolerance = 1e-12
expect = pass
citation = alpha_{r,c}^*(dH) = 0

[check circle-tangency]
op = tangency
dynamics = heisenberg
map = circle
expect = pass
citation = level sets of (r, z) are invariant

[check circles-slice]
op = check-complete
dynamics = heisenberg
complete = circles
expect = pass
citation = alpha_{r,c} with X = c^2 d/dphi is a complete slicing

[check radius-height]
op = check-constant
dynamics = heisenberg
constant = radius-height
expect = pass
citation = F = (sqrt(x^2 + y^2), z) is a constant of the motion

[check circles-constant]
op = constant-from-complete
dynamics = heisenberg
complete = circles
expect = pass
citation = a complete slicing yields a constant of the motion
)";

const char* const kDoubleOscillator = R"(# Double oscillator fibred over the x axis; alpha is not a slicing.
[space P]
coords = x; px; y; py
bounds = -1.5 1.5; -1.5 1.5; -1.5 1.5; -1.5 1.5

[space M]
coords = x
bounds = -0.9 0.9

[symplectic oscillator]
space = P
omega = 0; 1; 0; 0 | -1; 0; 0; 0 | 0; 0; 0; 1 | 0; 0; -1; 0
hamiltonian = (x^2 + px^2 + y^2 + py^2)/2

[map pr1]
source = P
target = M
components = x

[fibration pi]
projection = pr1
adapted = 1

[map alpha]
source = M
target = P
components = x; x; sqrt(1 - x^2); sqrt(1 - x^2)

[check alpha-fibred]
op = check-fibred
dynamics = oscillator
fibration = pi
section = alpha
expect = fail
citation = alpha is not a slicing section

[check alpha-energy]
op = constant-on-image
map = alpha
function = (x^2 + px^2 + y^2 + py^2)/2
tolerance = 1e-12
expect = pass
citation = H o alpha = c^2 is constant

[check fibres]
op = fibre-isotropy
symplectic = oscillator
fibration = pi
expect = fail
citation = the fibres of pr1 are not isotropic
)";

const char* const kLineField = R"(# Z = d/dx on R^3.
[space P]
coords = x; y; z
bounds = -2 2; -2 2; -2 2

[space UV]
coords = u; v
bounds = -1 1; -1 1

[space V]
coords = v
bounds = -1 1

[space C]
coords = c
bounds = -1 1

[space R]
coords = h

[system line]
space = P
field = 1; 0; 0

[map alpha]
source = UV
target = P
components = u; v; 0

[map alpha-bar]
source = UV
target = P
components = u; 0; v

[map beta]
source = V
target = P
components = 0; v; 0

[map height]
source = P
target = R
components = z

[slicing alpha-bar-slicing]
map = alpha-bar
field = 1; 0

[complete planes]
base = UV
parameters = C
target = P
family = u; v; c
inverse = x; y; z
fields = 1; 0

[check alpha-tangent]
op = tangency
dynamics = line
map = alpha
expect = pass
citation = alpha is a solution

[check alpha-bar-slicing]
op = check-slicing
dynamics = line
slicing = alpha-bar-slicing
expect = pass
citation = alpha-bar is a solution with X = d/du

[check beta-tangent]
op = tangency
dynamics = line
map = beta
expect = fail
citation = Z is not tangent to the line beta

[check height-on-alpha]
op = constant-on-image
map = alpha
function = z
expect = pass
citation = F o alpha = 0 is constant

[check height-constant]
op = check-constant
dynamics = line
constant = height
expect = pass
citation = z is a constant of the motion

[check planes-slice]
op = check-complete
dynamics = line
complete = planes
expect = pass
citation = the planes z = c form a complete slicing
)";

const char* const kLimitCycle = R"(# rdot = r(1 - r^2), phidot = 1 in polar coordinates.
[space P]
coords = r; phi
periods = phi: 2*atan2(0, -1)
bounds = 0.1 2; 0 2*atan2(0, -1)
constraints = r > 0

[space M]
coords = phi
periods = phi: 2*atan2(0, -1)
bounds = 0 2*atan2(0, -1)

[space T]
coords = s
bounds = 0.5 1.1

[space R]
coords = h

[system limit-cycle]
space = P
field = r*(1 - r^2); 1

[map cycle]
source = M
target = P
components = 1; phi

[map inner-circle]
source = M
target = P
components = 0.5; phi

[map radius]
source = P
target = R
components = r

[map ray]
source = T
target = P
components = s; 0

[slicing cycle-slicing]
map = cycle
field = 1

[slicing inner-slicing]
map = inner-circle

[check cycle]
op = check-slicing
dynamics = limit-cycle
slicing = cycle-slicing
expect = pass
citation = the limit cycle r = 1 is invariant

[check inner-circle]
op = check-slicing
dynamics = limit-cycle
slicing = inner-slicing
expect = fail
citation = circles r != 1 are not invariant

[check radius]
op = check-constant
dynamics = limit-cycle
constant = radius
expect = fail
citation = no nontrivial global constants of the motion

[check local-straightening]
op = straighten
dynamics = limit-cycle
transversal = ray
t_min = -0.3
t_max = 0.3
samples = 40
expect = pass
citation = away from equilibria the flow gives a local complete slicing
)";

const char* const kSinLimitCycles = R"(# xdot = -y + x sin(x^2 + y^2), ydot = x + y sin(x^2 + y^2).
[space P]
coords = x; y
bounds = -3 3; -3 3

[space M]
coords = phi
periods = phi: 2*atan2(0, -1)
bounds = 0 2*atan2(0, -1)

[system sin-cycles]
space = P
field = -y + x*sin(x^2 + y^2); x + y*sin(x^2 + y^2)

[map cycle-1]
source = M
target = P
components = sqrt(atan2(0, -1))*cos(phi); sqrt(atan2(0, -1))*sin(phi)

[map cycle-2]
source = M
target = P
components = sqrt(2*atan2(0, -1))*cos(phi); sqrt(2*atan2(0, -1))*sin(phi)

[map unit-circle]
source = M
target = P
components = cos(phi); sin(phi)

[check cycle-1]
op = tangency
dynamics = sin-cycles
map = cycle-1
expect = pass
citation = x^2 + y^2 = k pi are limit cycles

[check cycle-2]
op = tangency
dynamics = sin-cycles
map = cycle-2
expect = pass
citation = x^2 + y^2 = k pi are limit cycles

[check unit-circle]
op = tangency
dynamics = sin-cycles
map = unit-circle
expect = fail
citation = other circles are not invariant
)";

const char* const kTorus = R"(# Irrational linear flow xdot = 1, ydot = r with r = sqrt(2).
[space T2]
coords = x; y
periods = x: 2*atan2(0, -1); y: 2*atan2(0, -1)
bounds = 0 2*atan2(0, -1); 0 2*atan2(0, -1)

[space S1]
coords = w
periods = w: 2*atan2(0, -1)

[space R]
coords = h

[system torus]
space = T2
field = 1; sqrt(2)

[map phase]
source = T2
target = S1
components = y - sqrt(2)*x

[map sin-phase]
source = T2
target = R
components = sin(y - sqrt(2)*x)

[check phase-infinitesimal]
op = check-constant
dynamics = torus
constant = phase
expect = pass
citation = y - r x is locally constant along the flow

[check phase-integral]
op = check-constant
dynamics = torus
constant = phase
mode = integral
horizon = 10
samples = 40
expect = fail
citation = the irrational flow has no global constant; drift appears on wrapping

[check sin-phase-integral]
op = check-constant
dynamics = torus
constant = sin-phase
mode = integral
horizon = 10
samples = 40
expect = fail
citation = the irrational flow has no global constant; drift appears on wrapping
)";

const char* const kFreeParticle = R"(# Free particle on T*R^2, split layout (q1, q2, p1, p2).
[space P]
coords = q1; q2; p1; p2
bounds = -2 2; -2 2; -2 2; -2 2

[space Q]
coords = q1; q2
bounds = -1 1; -1 1

[space TQ]
coords = q1; q2; v1; v2
bounds = -2 2; -2 2; -2 2; -2 2

[symplectic free]
space = P
omega = 0; 0; 1; 0 | 0; 0; 0; 1 | -1; 0; 0; 0 | 0; -1; 0; 0
hamiltonian = (p1^2 + p2^2)/2

[map tau]
source = P
target = Q
components = q1; q2

[fibration cotangent]
projection = tau
adapted = 2

[map momentum-section]
source = Q
target = P
components = q1; q2; 0.4; -1.5

[map sheared-section]
source = Q
target = P
components = q1; q2; q1; 0

[sode velocities]
space = TQ
functions = v1; v2

[check momentum-fibred]
op = check-fibred
dynamics = free
fibration = cotangent
section = momentum-section
expect = pass
citation = level sets p = p0 are invariant

[check momentum-hj]
op = fibred-hj
symplectic = free
fibration = cotangent
section = momentum-section
expect = pass
citation = with isotropic fibres a section is a slicing iff it solves the HJ equation

[check sheared-fibred]
op = check-fibred
dynamics = free
fibration = cotangent
section = sheared-section
expect = fail
citation = alpha = (q, q1, 0) is not invariant

[check sheared-hj]
op = fibred-hj
symplectic = free
fibration = cotangent
section = sheared-section
expect = fail
citation = with isotropic fibres a section is a slicing iff it solves the HJ equation

[check fibres]
op = fibre-isotropy
symplectic = free
fibration = cotangent
expect = pass
citation = cotangent fibres are Lagrangian

[check momentum-lagrangian]
op = classify
symplectic = free
map = momentum-section
kind = lagrangian
expect = pass
citation = the image of a closed one-form is Lagrangian

[check classical]
op = classical-hj
symplectic = free
base = Q
generating = 0.4*q1 - 1.5*q2
expect = pass
citation = H(q, dW) is constant for W = p0 . q

[check momenta-involution]
op = involution
structure = free
functions = p1; p2
expect = pass
citation = the momenta are in involution

[check second-order]
op = second-order
dynamics = free
expect = pass
citation = Z = p d/dq read on TQ with v = p is second order

[check section-field]
op = section-field
dynamics = free
section = momentum-section
expect = pass
citation = for a second-order Z the induced X equals alpha

[check reconstruct]
op = reconstruct-sode
sode = velocities
expect = pass
citation = f_i = v_i gives Z = v d/dq
)";

const char* const kOscillator = R"(# One degree of freedom oscillator H = (q^2 + p^2)/2.
[space P]
coords = q; p
bounds = -1.5 1.5; -1.5 1.5

[space M]
coords = q
bounds = -0.9 0.9

[space Time]
coords = t
bounds = 0 3

[space E]
coords = e

[space TM]
coords = q; v
bounds = -1.5 1.5; -1.5 1.5

[symplectic oscillator]
space = P
omega = 0; 1 | -1; 0
hamiltonian = (q^2 + p^2)/2

[map energy]
source = P
target = E
components = (q^2 + p^2)/2

[map path]
source = Time
target = P
components = cos(2*t); -sin(2*t)

[slicing fast-path]
map = path
field = 1

[map tau]
source = P
target = M
components = q

[fibration cotangent]
projection = tau
adapted = 1

[map energy-section]
source = M
target = P
components = q; sqrt(1 - q^2)

[map velocity-section]
source = M
target = TM
components = q; sqrt(1 - q^2)

[sode oscillator-sode]
space = TM
functions = (q^2 + v^2)/2

[check energy-infinitesimal]
op = check-constant
dynamics = oscillator
constant = energy
expect = pass
citation = H is a constant of the motion

[check energy-integral]
op = check-constant
dynamics = oscillator
constant = energy
mode = integral
horizon = 10
samples = 40
expect = pass
citation = H is a constant of the motion

[check path-hj]
op = hj-residual
symplectic = oscillator
slicing = fast-path
tolerance = 1e-12
expect = pass
citation = H o alpha is constant, so the HJ residual vanishes

[check path-slicing]
op = check-slicing
dynamics = oscillator
slicing = fast-path
expect = fail
citation = the HJ equation does not imply the slicing equation

[check energy-section]
op = check-fibred
dynamics = oscillator
fibration = cotangent
section = energy-section
expect = pass
citation = energy level sets are invariant

[check classical]
op = classical-hj
symplectic = oscillator
base = M
generating = (q*sqrt(1 - q^2) + atan2(q, sqrt(1 - q^2)))/2
expect = pass
citation = H(q, dW/dq) = E for the oscillator generating function

[check reconstruct]
op = reconstruct-sode
sode = oscillator-sode
bounds = -1.5 1.5; 0.1 1.5
expect = pass
citation = f = (q^2 + v^2)/2 gives qddot = -q

[check sode-section]
op = section-field
dynamics = oscillator-sode
section = velocity-section
expect = pass
citation = for a second-order Z the induced X equals alpha
)";

const char* const kKsOscillator = R"(# Isotropic 2-dof oscillator on R^4 minus the origin, interleaved (x1, y1, x2, y2).
# The candidate constant is the quadratic Hopf map; its components are supplied here.
[space P]
coords = x1; y1; x2; y2
bounds = -1.5 1.5; -1.5 1.5; -1.5 1.5; -1.5 1.5
constraints = x1^2 + y1^2 + x2^2 + y2^2 > 0

[space R3]
coords = k1; k2; k3

[symplectic isotropic]
space = P
omega = 0; 1; 0; 0 | -1; 0; 0; 0 | 0; 0; 0; 1 | 0; 0; -1; 0
hamiltonian = (x1^2 + y1^2 + x2^2 + y2^2)/2

[map hopf]
source = P
target = R3
components = 2*(x1*x2 + y1*y2); 2*(y1*x2 - x1*y2); x1^2 + y1^2 - x2^2 - y2^2

[check hopf-infinitesimal]
op = check-constant
dynamics = isotropic
constant = hopf
expect = pass
citation = the quadratic Hopf map is a constant of the motion

[check hopf-integral]
op = check-constant
dynamics = isotropic
constant = hopf
mode = integral
horizon = 10
samples = 20
expect = pass
citation = the quadratic Hopf map is a constant of the motion

[check energy-difference-involution]
op = involution
structure = isotropic
functions = (x1^2 + y1^2 + x2^2 + y2^2)/2; x1^2 + y1^2 - x2^2 - y2^2
expect = pass
citation = H and the third component commute

[check hopf-involution]
op = involution
structure = isotropic
functions = 2*(x1*x2 + y1*y2); 2*(y1*x2 - x1*y2); x1^2 + y1^2 - x2^2 - y2^2
expect = fail
citation = the Hopf components do not commute pairwise
)";

}  // namespace

const std::vector<CorpusEntry>& corpus_entries() {
  static const std::vector<CorpusEntry> entries = {
      {"radial", "radial field on the punctured plane, rays as a complete slicing", kRadial},
      {"heisenberg", "Heisenberg bivector, circles as Lagrangian slicings", kHeisenberg},
      {"double-oscillator-counterexample", "section with constant energy that is not a slicing", kDoubleOscillator},
      {"line-field-r3", "Z = d/dx on R^3 with planes and a transverse line", kLineField},
      {"limit-cycle", "polar system with one limit cycle", kLimitCycle},
      {"sin-limit-cycles", "planar system with limit cycles at x^2 + y^2 = k pi", kSinLimitCycles},
      {"torus-irrational", "irrational linear flow on the torus", kTorus},
      {"free-particle", "free particle on T*R^2", kFreeParticle},
      {"oscillator-1dof", "one degree of freedom oscillator", kOscillator},
      {"ks-oscillator", "isotropic oscillator with the quadratic Hopf map", kKsOscillator},
  };
  return entries;
}

const CorpusEntry& corpus_entry(const std::string& id) {
  for (const auto& e : corpus_entries()) {
    if (e.id == id) return e;
  }
  throw std::out_of_range("unknown corpus entry '" + id + "'");
}

Definition load_corpus(const std::string& id) { return Definition::parse(corpus_entry(id).source); }

EntryResult run_corpus_entry(const std::string& id, const RunOptions& options) {
  const Definition def = load_corpus(id);
  EntryResult out;
  out.id = id;
  for (const auto& spec : def.checks()) {
    out.outcomes.push_back(run_expected(def, spec, options));
    out.all_matched = out.all_matched && out.outcomes.back().matched;
  }
  return out;
}

}  // namespace slicekit
