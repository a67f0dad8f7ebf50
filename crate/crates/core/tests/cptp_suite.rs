//! Every channel family keeps states valid when applied to random targets of
//! random multi-qubit states.

use krausprop_core::channels::{
    random_structured_sq, standard_kraus, ErrorKind, GateError, ProbabilisticError, StructuredDqKraus,
    StructuredSqKraus, ThermalRelaxation,
};
use krausprop_core::linalg::{random_complex_density, validate_density};
use krausprop_core::circuit::GateKind;
use krausprop_core::rng::{derived_rng, StreamRng};
use rand::Rng;

const APPLICATIONS: usize = 1000;

fn check_family(name: &str, seed: u64, mut make: impl FnMut(&mut StreamRng) -> GateError) {
    let mut rng = derived_rng(seed, 0);
    let mut state_rng = derived_rng(seed, 1);
    for i in 0..APPLICATIONS {
        let e = make(&mut rng);
        let arity = e.arity().unwrap_or(1);
        let n = rng.random_range(arity..=3);
        let first = rng.random_range(0..n);
        let targets: Vec<usize> = if arity == 1 {
            vec![first]
        } else {
            let mut second = rng.random_range(0..n - 1);
            if second >= first {
                second += 1;
            }
            vec![first, second]
        };
        let rho = random_complex_density(1 << n, &mut state_rng).unwrap();
        let out = e.apply_exact(&rho, &targets).unwrap();
        let report = validate_density(out.matrix(), 1e-10);
        assert!(report.trace_deviation <= 1e-10, "{name} #{i}: {report}");
        assert!(report.hermitian_deviation <= 1e-10, "{name} #{i}: {report}");
        assert!(report.min_eigenvalue >= -1e-9, "{name} #{i}: {report}");
        if let GateError::Kraus(k) = &e {
            assert!(k.normalization_error() <= 1e-10);
        }
    }
}

#[test]
fn structured_single_qubit() {
    check_family("structured_sq", 300, |rng| {
        let k = random_structured_sq(1.0, rng);
        assert!(k.expand().normalization_error() <= 1e-10);
        GateError::StructuredSq(k)
    });
}

#[test]
fn structured_single_qubit_expanded() {
    check_family("structured_sq_kraus", 301, |rng| GateError::Kraus(random_structured_sq(1.0, rng).expand()));
}

#[test]
fn structured_double_qubit() {
    check_family("structured_dq", 302, |rng| {
        let k = StructuredDqKraus::new(random_structured_sq(1.0, rng), random_structured_sq(1.0, rng));
        assert!(k.expand().normalization_error() <= 1e-10);
        if rng.random() {
            GateError::Kraus(k.expand())
        } else {
            GateError::StructuredDq(k)
        }
    });
}

#[test]
fn amplitude_and_phase_damping() {
    check_family("damping", 303, |rng| {
        let x = rng.random::<f64>();
        let k = if rng.random() {
            StructuredSqKraus::amplitude_damping(x).unwrap()
        } else {
            StructuredSqKraus::phase_damping(x).unwrap()
        };
        GateError::Kraus(k.expand())
    });
}

#[test]
fn standard_kraus_forms() {
    let kinds = [ErrorKind::X, ErrorKind::Y, ErrorKind::Z, ErrorKind::Reset0, ErrorKind::Reset1, ErrorKind::Depolarizing];
    check_family("standard_kraus", 304, |rng| {
        let kind = &kinds[rng.random_range(0..kinds.len())];
        GateError::Kraus(standard_kraus(kind, rng.random()).unwrap())
    });
}

fn random_probabilistic(rng: &mut StreamRng, arity: usize) -> ProbabilisticError {
    let mut kinds = vec![ErrorKind::Reset0, ErrorKind::Reset1, ErrorKind::Depolarizing];
    if arity == 1 {
        kinds.extend([ErrorKind::X, ErrorKind::Y, ErrorKind::Z, ErrorKind::CustomUnitary(GateKind::H.matrix())]);
    } else {
        kinds.push(ErrorKind::CustomUnitary(GateKind::Cnot.matrix()));
        kinds.push(ErrorKind::CustomUnitary(GateKind::Cp(0.7).matrix()));
    }
    let count = rng.random_range(1..=4);
    let budget: f64 = rng.random();
    let terms = (0..count)
        .map(|_| (kinds[rng.random_range(0..kinds.len())].clone(), budget / count as f64 * rng.random::<f64>()))
        .collect();
    ProbabilisticError::new(arity, terms).unwrap()
}

#[test]
fn probabilistic_single_qubit() {
    check_family("probabilistic_1q", 305, |rng| GateError::Probabilistic(random_probabilistic(rng, 1)));
}

#[test]
fn probabilistic_double_qubit() {
    check_family("probabilistic_2q", 306, |rng| GateError::Probabilistic(random_probabilistic(rng, 2)));
}

#[test]
fn thermal_relaxation_both_branches() {
    check_family("thermal", 307, |rng| {
        let t1 = 20.0 + 100.0 * rng.random::<f64>();
        let t2 = t1 * (0.1 + 1.9 * rng.random::<f64>());
        let th = ThermalRelaxation::new(t1, t2, 10.0 * rng.random::<f64>(), rng.random()).unwrap();
        let e = th.to_gate_error().unwrap();
        if let GateError::StructuredSq(k) = &e {
            assert!(k.expand().normalization_error() <= 1e-10);
        }
        e
    });
}

#[test]
fn compositions() {
    check_family("composed", 308, |rng| {
        let th = ThermalRelaxation::new(50.0, 70.0, 1.0, 0.05).unwrap().to_gate_error().unwrap();
        let parts = vec![
            GateError::Probabilistic(random_probabilistic(rng, 1)),
            th,
            GateError::StructuredSq(random_structured_sq(0.3, rng)),
        ];
        GateError::composed(parts).unwrap()
    });
}
