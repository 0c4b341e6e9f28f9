//! Prints the constant each battery needs: `cargo run --release --example calibrate -- SEEDS...`

use orbitcount::calibration::*;

fn show(f: &Fit) {
    println!("{:>13} seed {:>3} n {:>3} required {:.6}", f.name, f.seed, f.instances, f.required);
}

fn main() -> orbitcount::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let only = args.iter().find_map(|a| a.strip_prefix("--only=")).map(str::to_string);
    let seeds: Vec<u64> = args.iter().filter(|a| !a.starts_with("--")).map(|s| s.parse().expect("seed")).collect();
    let want = |name: &str| only.as_deref().map_or(true, |o| o == name);
    for seed in if seeds.is_empty() { vec![0] } else { seeds } {
        if want("height") {
            show(&fit_height_prod(seed, 500)?);
            show(&fit_xi_height(seed, 500)?);
            show(&fit_height_det(seed, 500)?);
            show(&fit_poly_eval(seed, 500)?);
        }
        if want("lojas") {
            show(&fit_lojas(seed)?);
        }
        if want("vabs") {
            show(&fit_minor_v_abs(seed, 60)?);
        }
        if want("minor") {
            let (md, mh) = fit_minor_deg_height(seed, 30)?;
            show(&md);
            show(&mh);
        }
    }
    Ok(())
}
