//! Run configuration: TOML system files, profile selection strings, and
//! the named builtin systems used throughout the test suites.
//!
//! A system file is a key-value tree:
//!
//! ```toml
//! dim = 2
//! A = [[-1.0, 0.5], [-0.5, -2.0]]   # or { gen = "diag", values = [-1, -2] }
//! b = [1.0, 0.0]                    # entries may be [re, im] pairs
//! u0 = [1.0, 1.0]
//! T = 1.0
//! time_dependent = false
//! psi = "erf:eps=1e-6"              # optional profile selection
//! epsilon = 1e-6                    # optional accuracy knob
//! ```
//!
//! Builtin generators: `{ gen = "diag", values = [...] }` and
//! `{ gen = "convection-diffusion-1d", nu = .., c = .. }` (periodic
//! centered differences on [0, 1)).

use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;
use serde::Deserialize;

use crate::error::{Result, SchroError};
use crate::float::Real;
use crate::linalg::{CMat, CVec};
use crate::profiles::{self, InitProfile};
use crate::system::{convection_diffusion_1d, diag_matrix, DynamicalSystem, MatrixFn, VectorFn};

/// A scalar-or-pair entry: `1.5` or `[1.5, -0.25]` (re, im).
#[derive(Deserialize, Clone, Copy, Debug)]
#[serde(untagged)]
pub enum NumEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl NumEntry {
    fn to_complex<T: Real>(self) -> Complex<T> {
        match self {
            NumEntry::Real(re) => Complex::new(T::of(re), T::zero()),
            NumEntry::Pair([re, im]) => Complex::new(T::of(re), T::of(im)),
        }
    }
}

/// The `A` field: dense literal or named generator.
#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum MatrixSpec {
    Dense(Vec<Vec<NumEntry>>),
    Generator {
        gen: String,
        #[serde(default)]
        values: Option<Vec<NumEntry>>,
        #[serde(default)]
        nu: Option<f64>,
        #[serde(default)]
        c: Option<f64>,
    },
}

/// Parsed system file.
#[derive(Deserialize, Debug)]
pub struct SystemFile {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(default)]
    pub b: Option<Vec<NumEntry>>,
    pub u0: Vec<NumEntry>,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub time_dependent: bool,
    #[serde(default)]
    pub psi: Option<String>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub lift: Option<LiftSection>,
}

/// Optional `[lift]` table: clock-grid settings.
#[derive(Deserialize, Debug, Clone, Copy)]
pub struct LiftSection {
    #[serde(default)]
    pub ns: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    /// Half-extent `pi S` of the clock interval.
    #[serde(rename = "S", default)]
    pub s_half: Option<f64>,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SchroError::config(format!("system file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SchroError::config(format!("cannot read system file {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Builds the dynamical system (validating the negativity gate).
    pub fn build<T: Real>(&self) -> Result<DynamicalSystem<T>> {
        if self.time_dependent {
            return Err(SchroError::config(
                "system files describe constant systems; time-dependent systems are builtin or library-constructed",
            ));
        }
        let n = self.dim;
        let a: CMat<T> = match &self.a {
            MatrixSpec::Dense(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(SchroError::config(format!("A must be {n}x{n}")));
                }
                let mut m = Array2::zeros((n, n));
                for (i, row) in rows.iter().enumerate() {
                    for (j, &e) in row.iter().enumerate() {
                        m[(i, j)] = e.to_complex();
                    }
                }
                m
            }
            MatrixSpec::Generator { gen, values, nu, c } => match gen.as_str() {
                "diag" => {
                    let vals = values
                        .as_ref()
                        .ok_or_else(|| SchroError::config("diag generator needs `values`"))?;
                    if vals.len() != n {
                        return Err(SchroError::config("diag values length must equal dim"));
                    }
                    let entries: Vec<Complex<T>> = vals.iter().map(|&v| v.to_complex()).collect();
                    diag_matrix(&entries)
                }
                "convection-diffusion-1d" => {
                    let nu = T::of(nu.unwrap_or(0.05));
                    let c = T::of(c.unwrap_or(1.0));
                    convection_diffusion_1d(n, nu, c)?
                }
                other => {
                    return Err(SchroError::config(format!("unknown matrix generator `{other}`")))
                }
            },
        };
        let b: CVec<T> = match &self.b {
            Some(entries) => {
                if entries.len() != n {
                    return Err(SchroError::config("b length must equal dim"));
                }
                entries.iter().map(|&e| e.to_complex()).collect()
            }
            None => CVec::zeros(n),
        };
        if self.u0.len() != n {
            return Err(SchroError::config("u0 length must equal dim"));
        }
        let u0: CVec<T> = self.u0.iter().map(|&e| e.to_complex()).collect();
        DynamicalSystem::new(
            MatrixFn::Constant(a),
            VectorFn::Constant(b),
            u0,
            T::of(self.horizon),
            false,
        )
    }
}

/// Parses the profile selection string:
/// `exp_abs | cutoff:d=<v> | hermite:r=<v> | erf:eps=<v> | quartic:eps=<v>`.
/// For the accuracy-coupled families the `eps` parameter may be omitted,
/// in which case `default_eps` is used.
pub fn parse_profile<T: Real>(spec: &str, default_eps: T) -> Result<InitProfile<T>> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let arg_value = |expected_key: &str| -> Result<f64> {
        let args = args.ok_or_else(|| {
            SchroError::config(format!("profile `{name}` needs `{expected_key}=<value>`"))
        })?;
        let (key, value) = args.split_once('=').ok_or_else(|| {
            SchroError::config(format!("malformed profile argument `{args}`; want key=value"))
        })?;
        if key.trim() != expected_key {
            return Err(SchroError::config(format!(
                "profile `{name}` takes `{expected_key}=`, got `{key}`"
            )));
        }
        value
            .trim()
            .parse::<f64>()
            .map_err(|e| SchroError::config(format!("bad value in `{args}`: {e}")))
    };
    match name {
        "exp_abs" => Ok(profiles::make_exp_abs()),
        "cutoff" => {
            let d = arg_value("d")?;
            profiles::make_cutoff(T::of(64.0), T::of(d))
        }
        "hermite" => {
            let r = arg_value("r")?;
            if r < 1.0 || r.fract() != 0.0 {
                return Err(SchroError::config("hermite `r` must be a positive integer"));
            }
            profiles::make_hermite(r as usize)
        }
        "erf" => {
            let eps = if args.is_some() { T::of(arg_value("eps")?) } else { default_eps };
            profiles::make_erf(eps)
        }
        "quartic" => {
            let eps = if args.is_some() { T::of(arg_value("eps")?) } else { default_eps };
            profiles::make_quartic(eps)
        }
        other => Err(SchroError::config(format!("unknown profile `{other}`"))),
    }
}

/// Named systems used by the command-line driver and the test suites.
pub fn builtin_system<T: Real>(name: &str) -> Result<DynamicalSystem<T>> {
    let c = |re: f64| Complex::new(T::of(re), T::zero());
    match name {
        // The standard verification system.
        "std2" | "std2-homo" => {
            let mut a = Array2::zeros((2, 2));
            a[(0, 0)] = c(-1.0);
            a[(0, 1)] = c(0.5);
            a[(1, 0)] = c(-0.5);
            a[(1, 1)] = c(-2.0);
            let b: CVec<T> = if name == "std2" {
                vec![c(1.0), c(0.0)].into()
            } else {
                CVec::zeros(2)
            };
            DynamicalSystem::new(
                MatrixFn::Constant(a),
                VectorFn::Constant(b),
                vec![c(1.0), c(1.0)].into(),
                T::one(),
                false,
            )
        }
        "zero" => DynamicalSystem::new(
            MatrixFn::Constant(CMat::<T>::zeros((1, 1))),
            VectorFn::Constant(CVec::zeros(1)),
            vec![c(1.0)].into(),
            T::one(),
            false,
        ),
        "scalar-decay" => DynamicalSystem::new(
            MatrixFn::Constant(diag_matrix(&[c(-1.0)])),
            VectorFn::Constant(CVec::zeros(1)),
            vec![c(1.0)].into(),
            T::one(),
            false,
        ),
        // Scalar decay with a constant source; the wavefront mark of its
        // enlarged split is positive, which the first-order studies need.
        "scalar-source" => DynamicalSystem::new(
            MatrixFn::Constant(diag_matrix(&[c(-1.0)])),
            VectorFn::Constant(vec![c(1.0)].into()),
            vec![c(1.0)].into(),
            T::one(),
            false,
        ),
        // Purely anti-Hermitian generator: H1 = 0, unitary dynamics.
        "rotation" => {
            let mut a = Array2::zeros((2, 2));
            a[(0, 1)] = c(1.0);
            a[(1, 0)] = c(-1.0);
            DynamicalSystem::new(
                MatrixFn::Constant(a),
                VectorFn::Constant(CVec::zeros(2)),
                vec![c(1.0), c(0.5)].into(),
                T::one(),
                false,
            )
        }
        // Time-dependent scalar decay A(t) = -(1 + 0.5 sin t).
        "td-scalar" => DynamicalSystem::new(
            MatrixFn::TimeDependent(Arc::new(|t: T| {
                let mut m = Array2::zeros((1, 1));
                m[(0, 0)] = Complex::new(-(T::one() + T::of(0.5) * t.sin()), T::zero());
                m
            })),
            VectorFn::Constant(CVec::zeros(1)),
            vec![c(1.0)].into(),
            T::one(),
            true,
        ),
        other => Err(SchroError::config(format!(
            "unknown builtin system `{other}` (expected std2, std2-homo, zero, scalar-decay, scalar-source, rotation, td-scalar, or a file path)"
        ))),
    }
}

/// Loads a system by builtin name or TOML file path.
pub fn load_system<T: Real>(spec: &str) -> Result<(DynamicalSystem<T>, SystemMeta)> {
    if let Ok(sys) = builtin_system::<T>(spec) {
        return Ok((sys, SystemMeta { id: spec.into(), psi: None, epsilon: None, lift: None }));
    }
    let path = Path::new(spec);
    if path.exists() {
        let file = SystemFile::load(path)?;
        let sys = file.build()?;
        return Ok((
            sys,
            SystemMeta {
                id: spec.into(),
                psi: file.psi.clone(),
                epsilon: file.epsilon,
                lift: file.lift,
            },
        ));
    }
    Err(SchroError::config(format!(
        "`{spec}` is neither a builtin system nor an existing file"
    )))
}

/// Extra knobs a system file may carry.
pub struct SystemMeta {
    pub id: String,
    pub psi: Option<String>,
    pub epsilon: Option<f64>,
    pub lift: Option<LiftSection>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::ProfileKind;

    #[test]
    fn parse_dense_system() {
        let text = r#"
dim = 2
A = [[-1.0, 0.5], [-0.5, -2.0]]
b = [1.0, 0.0]
u0 = [1.0, 1.0]
T = 1.0
psi = "erf:eps=1e-6"
epsilon = 1e-6
"#;
        let f = SystemFile::parse(text).unwrap();
        let sys = f.build::<f64>().unwrap();
        assert_eq!(sys.dim, 2);
        assert_eq!(f.psi.as_deref(), Some("erf:eps=1e-6"));
    }

    #[test]
    fn parse_complex_entries_and_diag() {
        let text = r#"
dim = 2
A = { gen = "diag", values = [[-1.0, 0.5], [-2.0, -0.25]] }
u0 = [[0.0, 1.0], 1.0]
T = 0.5
"#;
        let f = SystemFile::parse(text).unwrap();
        let sys = f.build::<f64>().unwrap();
        let a = sys.a_of_t.at(0.0);
        assert_eq!(a[(0, 0)], num_complex::Complex64::new(-1.0, 0.5));
        assert_eq!(sys.u0[0], num_complex::Complex64::new(0.0, 1.0));
    }

    #[test]
    fn parse_convection_diffusion() {
        let text = r#"
dim = 8
A = { gen = "convection-diffusion-1d", nu = 0.05, c = 1.0 }
u0 = [1, 1, 1, 1, 1, 1, 1, 1]
T = 0.5
"#;
        let sys = SystemFile::parse(text).unwrap().build::<f64>().unwrap();
        assert_eq!(sys.dim, 8);
    }

    #[test]
    fn rejects_positive_definite_input() {
        let text = r#"
dim = 1
A = [[0.5]]
u0 = [1.0]
T = 1.0
"#;
        assert!(SystemFile::parse(text).unwrap().build::<f64>().is_err());
    }

    #[test]
    fn profile_spec_strings() {
        assert!(matches!(
            parse_profile::<f64>("exp_abs", 1e-6).unwrap().kind(),
            ProfileKind::ExpAbs
        ));
        assert!(matches!(
            parse_profile::<f64>("hermite:r=4", 1e-6).unwrap().kind(),
            ProfileKind::Hermite { r: 4 }
        ));
        match parse_profile::<f64>("erf:eps=1e-8", 1e-6).unwrap().kind() {
            ProfileKind::Erf { eps, .. } => assert!((eps - 1e-8).abs() < 1e-20),
            _ => panic!(),
        }
        // default epsilon flows into bare `erf`
        match parse_profile::<f64>("erf", 1e-4).unwrap().kind() {
            ProfileKind::Erf { eps, .. } => assert!((eps - 1e-4).abs() < 1e-16),
            _ => panic!(),
        }
        assert!(parse_profile::<f64>("cutoff:d=0.5", 1e-6).is_err());
        assert!(parse_profile::<f64>("nope", 1e-6).is_err());
        assert!(parse_profile::<f64>("hermite:d=4", 1e-6).is_err());
    }

    #[test]
    fn lift_section_parses() {
        let text = r#"
dim = 1
A = [[-1.0]]
u0 = [1.0]
T = 1.0
[lift]
ns = 512
m = 4
S = 3.5
"#;
        let f = SystemFile::parse(text).unwrap();
        let lift = f.lift.unwrap();
        assert_eq!(lift.ns, Some(512));
        assert_eq!(lift.m, Some(4));
        assert!((lift.s_half.unwrap() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn builtins_resolve() {
        for name in ["std2", "std2-homo", "zero", "scalar-decay", "scalar-source", "rotation", "td-scalar"]
        {
            assert!(builtin_system::<f64>(name).is_ok(), "{name}");
        }
        assert!(builtin_system::<f64>("missing").is_err());
    }
}
