use super::{Real, Rng, Tape, Var};
use crate::Result;

/// Dropout setting threaded through a forward pass. Evaluation passes carry no
/// generator, which turns every dropout site into the identity.
pub struct Dropout<'a> {
    pub rate: f32,
    rng: Option<&'a mut Rng>,
}

impl<'a> Dropout<'a> {
    pub fn eval() -> Self {
        Dropout { rate: 0.0, rng: None }
    }

    pub fn train(rate: f32, rng: &'a mut Rng) -> Self {
        Dropout {
            rate,
            rng: Some(rng),
        }
    }

    pub fn training(&self) -> bool {
        self.rng.is_some()
    }

    pub fn apply<T: Real>(&mut self, tape: &mut Tape<T>, x: Var) -> Result<Var> {
        tape.dropout(x, self.rate, self.rng.as_deref_mut())
    }
}
