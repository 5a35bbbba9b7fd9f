//! The linear system `Σ p_w(x̂) · D^w σ(f) = 0` over the coefficient field `K(x̂)`.

use std::collections::HashMap;

use super::state::{SigmaContext, SigmaState};
use crate::algebra::{assemble_columns, grlex_cmp, Exps, PolyMatrix, Vars};
use crate::error::{Error, Result};
use crate::series::monomials_up_to;

/// States `D^w σ(f)` for words `w` over the `s`-variables and one target direction.
pub struct StateTable<'a> {
    ctx: &'a SigmaContext,
    dirs: Vec<usize>,
    states: HashMap<Exps, SigmaState>,
}

pub struct LinearSystem {
    /// Derivation words, one per column, over all substituted variables.
    pub columns: Vec<Exps>,
    pub matrix: PolyMatrix,
    /// Variables the unknown coefficients may depend on.
    pub coef_vars: Vars,
    /// Position of each substituted variable among `coef_vars`.
    pub coef_map: Vec<Option<usize>>,
    /// Row keys `(β, s-exponents)`.
    pub rows: Vec<(Exps, Exps)>,
}

impl<'a> StateTable<'a> {
    pub fn new(ctx: &'a SigmaContext, dir: usize) -> Result<Self> {
        if !ctx.directions().contains(&dir) || ctx.s_vars().contains(&dir) {
            return Err(Error::InvalidArgument(format!(
                "{} is not a target direction",
                ctx.target().name(dir)
            )));
        }
        let mut dirs: Vec<usize> = ctx.s_vars().collect();
        dirs.push(dir);
        let mut states = HashMap::new();
        let init = ctx.init();
        states.insert(init.word.clone(), init);
        Ok(StateTable { ctx, dirs, states })
    }

    pub fn context(&self) -> &SigmaContext {
        self.ctx
    }

    /// Derivation variables: the `s`-variables, then the target direction.
    pub fn dirs(&self) -> &[usize] {
        &self.dirs
    }

    /// All words of total order `≤ n`, graded, ties broken lexicographically on
    /// `(s-exponents, target exponent)`.
    pub fn words(&self, n: u32) -> Vec<Exps> {
        let mut short = monomials_up_to(self.dirs.len(), n);
        short.sort_by(|a, b| grlex_cmp(a, b));
        short
            .into_iter()
            .map(|w| {
                let mut full = vec![0u32; self.ctx.target().len()];
                for (k, &d) in self.dirs.iter().enumerate() {
                    full[d] = w[k];
                }
                full
            })
            .collect()
    }

    pub fn state(&mut self, word: &Exps) -> Result<&SigmaState> {
        if !self.states.contains_key(word) {
            let k = (0..word.len()).rev().find(|&k| word[k] > 0).unwrap();
            let mut prev = word.clone();
            prev[k] -= 1;
            self.state(&prev)?;
            let next = self.ctx.propagate(&self.states[&prev], k)?;
            self.states.insert(word.clone(), next);
        }
        Ok(&self.states[word])
    }

    pub fn system(&mut self, n: u32) -> Result<LinearSystem> {
        let columns = self.words(n);
        for w in &columns {
            self.state(w)?;
        }
        let coords: Vec<_> = columns.iter().map(|w| &self.states[w].coords).collect();
        let s_vars: Vec<usize> = self.ctx.s_vars().collect();
        let a = assemble_columns(&coords, self.ctx.target(), &s_vars)?;
        Ok(LinearSystem {
            columns,
            matrix: a.matrix,
            coef_vars: a.coef_vars,
            coef_map: a.coef_map,
            rows: a.rows,
        })
    }
}
