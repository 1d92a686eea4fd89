use transonic::linear::*;
use transonic::*;

fn main() {
    let shock = {
        let gas = GasLaw::isothermal(1.0);
        let nozzle = Nozzle::new(NozzleShape::Polynomial(vec![1.0, 1.0]), 1.0, 3.0).unwrap();
        let opts = SteadyOptions::default();
        let rr = steady::forward_outflow_density(&gas, &nozzle, 1.0, 2.0, 2.0, &opts).unwrap();
        let bc = BoundaryData { rho_left: 1.0, u_left: 2.0, rho_right: rr };
        build_steady_shock(&gas, &nozzle, &bc, &opts).unwrap()
    };
    let n = 81usize;
    let coeffs = assemble_coefficients(shock.gas(), &shock, n).unwrap();
    let op = assemble_st(&coeffs, None).unwrap();
    println!("T = {}, steps = {}", op.t_horizon, op.n_steps);
    // Power iteration for the dominant eigenvector.
    let nd = 2*n;
    let mut v: Vec<f64> = (0..nd).map(|i| ((i*2654435761usize) % 1000) as f64 / 1000.0 - 0.5).collect();
    for _ in 0..200 {
        v = op.matrix.apply(&v);
        let nrm = v.iter().map(|x| x*x).sum::<f64>().sqrt();
        for x in v.iter_mut() { *x /= nrm; }
    }
    let av = op.matrix.apply(&v);
    let lam: f64 = v.iter().zip(av.iter()).map(|(a,b)| a*b).sum();
    println!("dominant lambda ~ {lam}");
    // localization of |psi| and |v| parts
    let psi_part = &v[..n]; let v_part = &v[n..];
    let mx_psi = psi_part.iter().cloned().fold(0.0f64, |a,b| a.max(b.abs()));
    let mx_v = v_part.iter().cloned().fold(0.0f64, |a,b| a.max(b.abs()));
    println!("max|psi| = {mx_psi:.3}, max|v| = {mx_v:.3}");
    let prof = |p: &[f64], name: &str, mx: f64| {
        let m = p.len();
        let chunks = 8;
        let mut out = format!("{name}: ");
        for c in 0..chunks {
            let lo = c*m/chunks; let hi = ((c+1)*m/chunks).min(m);
            let loc = p[lo..hi].iter().cloned().fold(0.0f64, |a,b| a.max(b.abs()));
            out += &format!("{:.2} ", loc/mx.max(1e-300));
        }
        println!("{out}");
    };
    prof(psi_part, "psi profile(8 octiles)", mx_psi);
    prof(v_part,   "v   profile(8 octiles)", mx_v);
    // high-frequency content: alternating-sign measure
    let alt: f64 = v_part.windows(2).map(|w| if w[0]*w[1] < 0.0 {1.0} else {0.0}).sum::<f64>() / (n-1) as f64;
    println!("sign-flip fraction in v: {alt:.2}");
}
