use rand::Rng;

use super::Expr;

/// Dense polynomial of total degree at most `degree` in the given
/// coordinates, with coefficients uniform in `[-1, 1]`.
pub fn random_polynomial<S: AsRef<str>>(coords: &[S], degree: u32, rng: &mut impl Rng) -> Expr {
    let mut exponents = Vec::new();
    monomials(coords.len(), degree, &mut vec![0; coords.len()], 0, &mut exponents);
    let mut sum: Option<Expr> = None;
    for e in exponents {
        let mut term = Expr::constant(rng.random_range(-1.0..=1.0));
        for (i, &k) in e.iter().enumerate() {
            if k > 0 {
                let v = Expr::var(coords[i].as_ref(), i);
                term = term * if k == 1 { v } else { v.powf(k as f64) };
            }
        }
        sum = Some(match sum {
            None => term,
            Some(s) => s + term,
        });
    }
    sum.unwrap_or_else(|| Expr::constant(0.0))
}

fn monomials(n: usize, left: u32, current: &mut Vec<u32>, i: usize, out: &mut Vec<Vec<u32>>) {
    if i == n {
        out.push(current.clone());
        return;
    }
    for k in 0..=left {
        current[i] = k;
        monomials(n, left - k, current, i + 1, out);
    }
    current[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cubic_in_three_variables_has_twenty_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_polynomial(&["q", "p", "z"], 3, &mut rng);
        let mut count = 0;
        let mut node = f.node();
        while let crate::expr::Node::Binary(crate::expr::BinaryOp::Add, lhs, _) = node {
            count += 1;
            node = lhs;
        }
        assert_eq!(count + 1, 20);
        // Reparses from its printed form to the same values.
        let g = Expr::parse(&f.to_string(), &["q", "p", "z"]).unwrap();
        let x = [0.3, -1.2, 2.0];
        assert!((f.eval(&x).unwrap() - g.eval(&x).unwrap()).abs() < 1e-12);
        assert!(f.max_index().unwrap() <= 2);
    }
}
