// How much power may leak toward the warden for a given detection
// tolerance, and what his best detector achieves at that level.

use fascovert::covertness::{covert_roots, dep_lower_bound, kl_divergence, CovertBudget};

pub fn run_example() -> fascovert::Result<Vec<(f64, f64)>> {
    let sigma2 = 1e-11;
    let mut rows = Vec::new();
    println!("{:>8} {:>10} {:>10} {:>12} {:>10}", "epsilon", "a1", "a2", "cap (W)", "DEP >=");
    for eps in [0.05, 0.1, 0.2, 0.3, 0.5] {
        let (a1, a2) = covert_roots(eps)?;
        let budget = CovertBudget::new(eps, sigma2)?;
        let dep = dep_lower_bound(sigma2, sigma2 + budget.power_cap)?;
        println!("{eps:>8} {a1:>10.6} {a2:>10.6} {:>12.4e} {dep:>10.6}", budget.power_cap);
        rows.push((eps, budget.power_cap));
    }
    // at the cap the divergence sits exactly on 2ε²
    let b = CovertBudget::new(0.2, sigma2)?;
    println!("KL at cap for eps=0.2: {:.6} (2eps^2 = 0.08)", kl_divergence(sigma2, sigma2 + b.power_cap)?);
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> fascovert::Result<()> {
    run_example().map(drop)
}
