//! Central-difference verification of tape gradients.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ParamStore, Real, Tape, Var};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GradcheckOptions {
    /// Finite-difference step; shrunk per coordinate near ReLU kinks.
    pub h: f64,
    /// Relative tolerance each coordinate must meet.
    pub tol: f64,
    /// Coordinates checked per parameter; `None` checks all of them.
    pub max_coords: Option<usize>,
    /// Seed for coordinate sampling.
    pub seed: u64,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        GradcheckOptions {
            h: 1e-3,
            tol: 1e-4,
            max_coords: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub coords_checked: usize,
    pub max_rel_err: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    /// Coordinates whose step was shrunk to avoid crossing a ReLU kink.
    pub step_halvings: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradcheckReport {
    pub tol: f64,
    pub params: Vec<ParamCheck>,
}

impl GradcheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.params.iter().map(|p| p.max_rel_err).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&ParamCheck> {
        self.params
            .iter()
            .max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err))
    }

    pub fn passed(&self) -> bool {
        self.max_rel_err() <= self.tol
    }

    pub fn failures(&self) -> impl Iterator<Item = &ParamCheck> {
        self.params.iter().filter(move |p| p.max_rel_err > self.tol)
    }
}

/// `|a - n| / max(1e-8, |a| + |n|)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

fn eval<T: Real, F>(f: &mut F, params: &ParamStore<T>) -> Result<(f64, Vec<bool>)>
where
    F: FnMut(&mut Tape<T>, &ParamStore<T>) -> Result<Var>,
{
    let mut tape = Tape::new();
    let out = f(&mut tape, params)?;
    let v = tape.value(out);
    if v.numel() != 1 {
        return Err(Error::shape("gradcheck", v.shape(), &[]));
    }
    let x = v.data()[0].as_f64();
    if !x.is_finite() {
        return Err(Error::Numeric(format!("loss evaluated to {x}")));
    }
    Ok((x, tape.relu_pattern()))
}

/// Halvings tried when a step crosses a ReLU kink.
const MAX_STEP_HALVINGS: u32 = 12;

/// Compares tape gradients of the scalar produced by `f` against fourth-order
/// central differences for every parameter in `params`. `f` must be deterministic.
/// When a perturbed evaluation lands on a different ReLU piece than the base
/// point, the step is halved until both sides agree with it.
pub fn finite_diff_gradcheck<T: Real, F>(
    params: &mut ParamStore<T>,
    mut f: F,
    opts: &GradcheckOptions,
) -> Result<GradcheckReport>
where
    F: FnMut(&mut Tape<T>, &ParamStore<T>) -> Result<Var>,
{
    let mut tape = Tape::new();
    let out = f(&mut tape, params)?;
    let loss = tape.value(out).data().first().map(|x| x.as_f64());
    if !loss.is_some_and(f64::is_finite) {
        return Err(Error::Numeric(format!("loss evaluated to {loss:?}")));
    }
    tape.backward(out)?.write_to(params);
    let base_pattern = tape.relu_pattern();
    drop(tape);

    let h = T::of(opts.h);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let names: Vec<String> = params.names().map(String::from).collect();
    let mut report = GradcheckReport {
        tol: opts.tol,
        params: Vec::with_capacity(names.len()),
    };
    for name in names {
        let (n, analytic) = {
            let p = params.get(&name).expect("name taken from the store");
            (p.tensor.numel(), p.tensor.grad.clone().expect("written above"))
        };
        let coords: Vec<usize> = match opts.max_coords {
            Some(k) if k < n => {
                let mut v = index::sample(&mut rng, n, k).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..n).collect(),
        };
        let mut check = ParamCheck {
            name: name.clone(),
            coords_checked: coords.len(),
            max_rel_err: 0.0,
            worst_index: 0,
            analytic: 0.0,
            numeric: 0.0,
            step_halvings: 0,
        };
        for (j, &i) in coords.iter().enumerate() {
            let orig = params.get(&name).expect("present").tensor.data()[i];
            let mut step = h;
            let mut halvings = 0;
            let numeric = loop {
                let mut at = |x: T| {
                    params.get_mut(&name).expect("present").tensor.data_mut()[i] = x;
                    eval(&mut f, params)
                };
                let (p1, m1) = (at(orig + step)?, at(orig - step)?);
                let (p2, m2) = (at(orig + step + step)?, at(orig - step - step)?);
                params.get_mut(&name).expect("present").tensor.data_mut()[i] = orig;
                // a kink inside the stencil invalidates the difference
                let smooth = [&p1, &m1, &p2, &m2].iter().all(|e| e.1 == base_pattern);
                if smooth || halvings == MAX_STEP_HALVINGS {
                    let s = step.as_f64();
                    break (8.0 * (p1.0 - m1.0) - (p2.0 - m2.0)) / (12.0 * s);
                }
                step = step / T::of(2.0);
                halvings += 1;
            };
            if halvings > 0 {
                check.step_halvings += 1;
            }
            let a = analytic[i].as_f64();
            let err = relative_error(a, numeric);
            if j == 0 || err > check.max_rel_err {
                check.max_rel_err = err;
                check.worst_index = i;
                check.analytic = a;
                check.numeric = numeric;
            }
        }
        report.params.push(check);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tensor;

    #[test]
    fn quadratic_matches_central_difference() {
        let mut s = ParamStore::<f64>::new();
        s.insert("x", Tensor::new(&[1], alloc::vec![3.0]).unwrap()).unwrap();
        let rep = finite_diff_gradcheck(
            &mut s,
            |t, p| {
                let x = t.param(p, "x")?;
                let y = t.mul(x, x)?;
                Ok(t.sum(y))
            },
            &GradcheckOptions::default(),
        )
        .unwrap();
        let c = &rep.params[0];
        assert_eq!(c.analytic, 6.0);
        assert!((c.numeric - 6.0).abs() < 1e-6);
        assert!(c.max_rel_err < 1e-6);
        assert!(rep.passed());
    }

    #[test]
    fn constant_function_has_zero_error() {
        let mut s = ParamStore::<f32>::new();
        s.insert("x", Tensor::full(&[3], 2.0)).unwrap();
        let rep = finite_diff_gradcheck(
            &mut s,
            |t, _| Ok(t.constant(Tensor::scalar(5.0))),
            &GradcheckOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.max_rel_err(), 0.0);
        assert!(s.get("x").unwrap().tensor.grad.as_ref().unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let mut s = ParamStore::<f32>::new();
        s.insert("x", Tensor::full(&[1], 1.0)).unwrap();
        let err = finite_diff_gradcheck(
            &mut s,
            |t, _| Ok(t.constant(Tensor::scalar(f32::NAN))),
            &GradcheckOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }
}
