// Windability certificates for Ising vertex functions, and the boundary of
// windability for the cubic family `[1, a, a, 1]`.

use std::error::Error;

use linegraph_ising::signature::ising_signature;
use linegraph_ising::windability::cone::verify_cone_membership;
use linegraph_ising::windability::{is_windable, is_windable_rational, parse_rational, Mode};
use num_rational::BigRational;

fn cubic(a: &BigRational) -> Vec<BigRational> {
    let one = BigRational::from_integer(1.into());
    vec![one.clone(), a.clone(), a.clone(), one]
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let sig = ising_signature(1.0, 0.5, 6);
    let verdict = is_windable(&sig, Mode::Float)?;
    println!("F(beta=1, mu=0.5, d=6): windable={} over {} pinnings", verdict.windable, verdict.certificates.len());
    if let Some(w) = verdict.worst_certificate() {
        println!("  tightest pinning (a={}, b={}), margin {:.3e}", w.a, w.b, w.margin);
        println!("  {}", serde_json::to_string(w)?);
    }

    // bisect on a, with each verdict computed in exact arithmetic
    let mut lo = parse_rational("0").unwrap();
    let mut hi = parse_rational("1").unwrap();
    let two = BigRational::from_integer(2.into());
    for _ in 0..40 {
        let mid = (&lo + &hi) / &two;
        if is_windable_rational(&cubic(&mid))?.windable {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let boundary = num_traits::ToPrimitive::to_f64(&hi).unwrap_or(f64::NAN);
    println!("[1,a,a,1] windable iff a >= {boundary:.9} (1/sqrt(3) = {:.9})", 1.0 / 3f64.sqrt());
    for text in ["0.57", "0.58", "0.7070", "0.7072"] {
        let a = parse_rational(text).unwrap();
        println!("  a={text}: windable={}", is_windable_rational(&cubic(&a))?.windable);
    }

    for (beta, m) in [(1.0, 4), (0.3, 5), (2.0, 8)] {
        // the truncated exponential series needs roughly e * beta * m^2 / 4 terms
        let order = (3.0 * beta * (m * m) as f64 / 4.0).ceil() as usize + 20;
        let r = verify_cone_membership(beta, m, order)?;
        println!(
            "cone expansion beta={beta} m={m}: nonnegative={}, coefficients={:?}, rel error {:.1e}",
            r.holds(),
            r.coefficients.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            r.max_rel_error
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
