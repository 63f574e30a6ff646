//! Built-in problem catalog: selector parsing and the list table.

use anyhow::{anyhow, bail, Result};
use rand::Rng;

use monodromy_core::problems::{
    cyclic_system, gaussian_moment_system, mixed_volume_example, power_curve,
};
use monodromy_core::ProblemInstance;

/// Resolve a selector like `cyclic5`, or a family name plus `--n`/`--k`,
/// into a constructed instance.
pub fn instantiate<R: Rng + ?Sized>(
    selector: &str,
    n: Option<u32>,
    k: Option<u32>,
    rng: &mut R,
) -> Result<ProblemInstance> {
    let (family, suffix) = split_suffix(selector);
    let size = |flag: Option<u32>, name: &str| -> Result<u32> {
        match (suffix, flag) {
            (Some(s), None) => Ok(s),
            (None, Some(f)) => Ok(f),
            (None, None) => bail!("{selector} needs a size: pass --{name} or e.g. {family}5"),
            (Some(_), Some(_)) => {
                bail!("pass either {selector} or --problem {family} --{name}, not both")
            }
        }
    };
    let instance = match family {
        "power" => power_curve(size(n, "n")?)?,
        "cyclic" => cyclic_system(size(n, "n")? as usize, rng)?,
        "gaussian" => gaussian_moment_system(size(k, "k")? as usize, rng)?,
        "mixedvol" => {
            if suffix.is_some() || n.is_some() || k.is_some() {
                bail!("mixedvol takes no size parameter");
            }
            mixed_volume_example(rng)?
        }
        _ => {
            return Err(anyhow!(
                "unknown problem {selector:?}; see `monodromy list`"
            ))
        }
    };
    Ok(instance)
}

fn split_suffix(selector: &str) -> (&str, Option<u32>) {
    let head = selector.trim_end_matches(|c: char| c.is_ascii_digit());
    if head.len() == selector.len() {
        (selector, None)
    } else {
        (head, selector[head.len()..].parse().ok())
    }
}

/// The list table: one row per concrete selector with established counts,
/// plus the open-ended families.
pub fn listing() -> String {
    let mut out = String::new();
    out.push_str("problem     vars  params  degree  classes  alpha\n");
    let rows = [
        ("power2", "1", "1", "4", "2", "x^2"),
        ("power3", "1", "1", "6", "2", "x^3"),
        ("power5", "1", "1", "10", "2", "x^5"),
        ("power10", "1", "1", "20", "2", "x^10"),
        ("cyclic3", "3", "3", "?", "?", "orbit sum of x0*x2"),
        ("cyclic4", "4", "4", "?", "?", "orbit sum of x0*x2"),
        ("cyclic5", "5", "5", "70", "7", "orbit sum of x0*x2"),
        ("cyclic6", "6", "6", "156", "13", "orbit sum of x0*x2"),
        ("cyclic7", "7", "7", "924", "66", "orbit sum of x0*x2"),
        ("gaussian2", "6", "5", "18", "9", "mu1 + mu2"),
        ("gaussian3", "9", "8", "?", "225", "mu1 + mu2 + mu3"),
        ("mixedvol", "2", "5", "4", "2", "x1 + x2"),
    ];
    for (name, vars, params, degree, classes, alpha) in rows {
        out.push_str(&format!(
            "{name:<11} {vars:<5} {params:<7} {degree:<7} {classes:<8} {alpha}\n"
        ));
    }
    out.push_str("\npower accepts any n >= 2; cyclic accepts 3 <= n <= 7.\n");
    out
}
