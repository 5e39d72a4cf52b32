//! JSON formats for states and circuits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use wignerlab::qmat::OperatorMatrix;
use wignerlab::stabilizer::StabilizerBasis;
use wignerlab::weyl::{PhasePoint, WeylLabel};
use wignerlab::wsim::{Circuit, Gate, GateKind, Initial, StateSpec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateFile {
    /// Eigenstate with eigenvalue `exp(πi·eigenvalue_exponent/d)`.
    Stabilizer { basis: String, eigenvalue_exponent: u64 },
    Dense { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

/// A single state, or a list of single-qudit stabilizer states forming a product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialFile {
    Product(Vec<StateFile>),
    Single(StateFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateFile {
    Hadamard { targets: Vec<usize> },
    Phase { targets: Vec<usize> },
    Weyl { label: Vec<(i64, i64)>, targets: Vec<usize> },
    Unitary { re: Vec<Vec<f64>>, im: Vec<Vec<f64>>, targets: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub d: u64,
    pub n: usize,
    pub initial: InitialFile,
    #[serde(default)]
    pub gates: Vec<GateFile>,
    /// One `[p, q]` pair per qudit for each measured Weyl operator.
    #[serde(default)]
    pub measurements: Vec<Vec<(i64, i64)>>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn matrix_from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<OperatorMatrix, CliError> {
    let dim = re.len();
    if im.len() != dim || re.iter().chain(im).any(|row| row.len() != dim) {
        return Err(usage("re and im must be square matrices of equal size"));
    }
    Ok(OperatorMatrix::from_fn(dim, |r, c| Complex64::new(re[r][c], im[r][c])))
}

pub fn matrix_to_parts(m: &OperatorMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let dim = m.dim();
    let part = |f: fn(Complex64) -> f64| (0..dim).map(|r| (0..dim).map(|c| f(m.get(r, c))).collect()).collect();
    (part(|z| z.re), part(|z| z.im))
}

fn label_from(coords: &[(i64, i64)], d: u64) -> WeylLabel {
    PhasePoint::new(d, coords)
}

fn label_to(label: &WeylLabel) -> Vec<(i64, i64)> {
    label.coords().iter().map(|&(p, q)| (p as i64, q as i64)).collect()
}

impl StateFile {
    pub fn stabilizer_spec(&self, d: u64) -> Result<StateSpec, CliError> {
        match self {
            StateFile::Stabilizer { basis, eigenvalue_exponent } => {
                let basis: StabilizerBasis = basis.parse().map_err(|e| usage(format!("basis {basis:?}: {e}")))?;
                if *eigenvalue_exponent >= 2 * d {
                    return Err(usage(format!("eigenvalue_exponent must lie in 0..{}", 2 * d)));
                }
                Ok(StateSpec { basis, exponent: *eigenvalue_exponent })
            }
            StateFile::Dense { .. } => Err(usage("product entries must be stabilizer states")),
        }
    }

    fn from_spec(s: &StateSpec) -> Self {
        StateFile::Stabilizer {
            basis: s.basis.to_string(),
            eigenvalue_exponent: s.exponent,
        }
    }
}

impl InitialFile {
    pub fn to_initial(&self, d: u64) -> Result<Initial, CliError> {
        match self {
            InitialFile::Product(states) => Ok(Initial::Product(
                states.iter().map(|s| s.stabilizer_spec(d)).collect::<Result<_, _>>()?,
            )),
            InitialFile::Single(StateFile::Dense { re, im }) => Ok(Initial::Dense(matrix_from_parts(re, im)?)),
            InitialFile::Single(s) => Ok(Initial::Product(vec![s.stabilizer_spec(d)?])),
        }
    }

    fn from_initial(initial: &Initial) -> Self {
        match initial {
            Initial::Product(specs) => InitialFile::Product(specs.iter().map(StateFile::from_spec).collect()),
            Initial::Dense(rho) => {
                let (re, im) = matrix_to_parts(rho);
                InitialFile::Single(StateFile::Dense { re, im })
            }
        }
    }
}

impl CircuitFile {
    pub fn to_circuit(&self) -> Result<Circuit, CliError> {
        let d = self.d;
        if d < 2 {
            return Err(usage("d must be at least 2"));
        }
        let gates = self
            .gates
            .iter()
            .map(|g| {
                Ok(match g {
                    GateFile::Hadamard { targets } => Gate { kind: GateKind::Hadamard, targets: targets.clone() },
                    GateFile::Phase { targets } => Gate { kind: GateKind::PhaseGate, targets: targets.clone() },
                    GateFile::Weyl { label, targets } => Gate {
                        kind: GateKind::WeylGate(label_from(label, d)),
                        targets: targets.clone(),
                    },
                    GateFile::Unitary { re, im, targets } => Gate {
                        kind: GateKind::CustomUnitary(matrix_from_parts(re, im)?),
                        targets: targets.clone(),
                    },
                })
            })
            .collect::<Result<_, CliError>>()?;
        Ok(Circuit {
            d,
            n: self.n,
            initial: self.initial.to_initial(d)?,
            gates,
            measurements: self.measurements.iter().map(|m| label_from(m, d)).collect(),
        })
    }

    pub fn from_circuit(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| {
                let targets = g.targets.clone();
                match &g.kind {
                    GateKind::Hadamard => GateFile::Hadamard { targets },
                    GateKind::PhaseGate => GateFile::Phase { targets },
                    GateKind::WeylGate(l) => GateFile::Weyl { label: label_to(l), targets },
                    GateKind::CustomUnitary(u) => {
                        let (re, im) = matrix_to_parts(u);
                        GateFile::Unitary { re, im, targets }
                    }
                }
            })
            .collect();
        CircuitFile {
            d: c.d,
            n: c.n,
            initial: InitialFile::from_initial(&c.initial),
            gates,
            measurements: c.measurements.iter().map(label_to).collect(),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}
