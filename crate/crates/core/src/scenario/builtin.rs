//! Built-in scenarios, stored as config text.

const LORENTZ: &str = "\
[scenario]
name = lorentz

[system]
group = u1

[internal]
kind = point
charge = 1

[gauge]
kind = uniform
field = 0, 0, 2

[lagrangian]
kind = free

[initial]
q = 0, 0, 0
v = 1, 0, 0

# three gyro-periods 2π/(q_e B)
[integrator]
method = rk4
dt = 1e-3
t_end = 9.42477796076938
";

const DIRAC_MONOPOLE: &str = "\
[scenario]
name = dirac_monopole

[system]
group = u1

[internal]
kind = point
charge = 1

[gauge]
kind = monopole
q_m = 0.5
patch = north

[lagrangian]
kind = free

[initial]
q = 1, 0, 0
v = 0, 1, 0.3

[integrator]
method = rk4
dt = 1e-3
t_end = 10
";

const WONG_SU2: &str = "\
[scenario]
name = wong_su2

[system]
group = so3

[internal]
kind = sphere
mu = 1

[gauge]
kind = wong
strength = 1
offset = 0.3

[lagrangian]
kind = free

[dynamics]
formulation = both

[initial]
q = 0.3, -0.2, 0.1
v = 0.4, 0.2, -0.1
z = 0.5, 0.2

[integrator]
method = rk4
dt = 1e-3
t_end = 5
";

const MAGNETIZED_KEPLER: &str = "\
[scenario]
name = magnetized_kepler

[system]
group = so2k
k = 1

[internal]
kind = point
charge = 1

[gauge]
kind = monopole
q_m = 1
patch = north

[lagrangian]
kind = kepler
mu = 1
k = 1

# circular orbit at r = 2
[initial]
q = 1.4142135623730951, 0, 1.4142135623730951
v = 0, -0.5, 0

[integrator]
method = rk4
dt = 1e-3
t_end = 10
";

const OSCILLATOR: &str = "\
[scenario]
name = oscillator

[system]
group = u1

[internal]
kind = point
charge = 0

[gauge]
kind = none

[lagrangian]
kind = oscillator
omega = 1

[initial]
q = 1
v = 0

[integrator]
method = rk4
dt = 0.05
t_end = 10
";

const BUILTINS: &[(&str, &str)] = &[
    ("lorentz", LORENTZ),
    ("dirac_monopole", DIRAC_MONOPOLE),
    ("wong_su2", WONG_SU2),
    ("magnetized_kepler", MAGNETIZED_KEPLER),
    ("oscillator", OSCILLATOR),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

/// Config text of a built-in scenario.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
