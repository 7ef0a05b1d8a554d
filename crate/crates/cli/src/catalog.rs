//! Static description of every constructor the scenario format accepts.

pub struct ModelEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub algebra: &'static str,
    pub anchor: &'static str,
}

pub fn catalog() -> &'static [ModelEntry] {
    &[
        ModelEntry { name: "witten", params: "W: expr(x)", algebra: "N=2", anchor: "Eqs. (1)-(4)" },
        ModelEntry { name: "free_complex", params: "d: int", algebra: "N=2 (d=2: N=4 with the S pair)", anchor: "Eqs. (5), (39)" },
        ModelEntry { name: "free_real", params: "D: int", algebra: "N=2", anchor: "Eq. (9)" },
        ModelEntry { name: "dolbeault", params: "d: int, omega: d×d matrix, W?: expr, antiholomorphic_check?: bool", algebra: "N=2 (measure det h)", anchor: "Eqs. (7)-(16)" },
        ModelEntry { name: "de_rham", params: "D: int, omega: D×D symmetric, W?: expr, torsion?: D×D antisymmetric", algebra: "N=2 (measure √det g)", anchor: "Eqs. (20)-(26)" },
        ModelEntry { name: "quasicomplex", params: "D: int, omega: D×D Hermitian, rhombus?: bool", algebra: "N=2", anchor: "§2.3, Eq. (27)" },
        ModelEntry { name: "kahler", params: "D: even, coframe|vielbein: D×D, structure?: flat D×D", algebra: "N=4 (Theorem 1)", anchor: "Eqs. (28)-(31), (70)-(74)" },
        ModelEntry { name: "hyperkahler", params: "D: 4k, coframe|vielbein, orientation?: self_dual|anti_self_dual", algebra: "N=8 (Theorem 2)", anchor: "Eqs. (33)-(36), (72), (75)" },
        ModelEntry { name: "gibbons_hawking", params: "centers: [[x,y,z]], weights?, epsilon?, deformation?: expr", algebra: "N=8 (Theorem 2)", anchor: "§3.2, Eq. (69)" },
        ModelEntry { name: "hkt_conformal", params: "g: expr(x1,y1,x2,y2)", algebra: "N=4", anchor: "Eqs. (39)-(40)" },
        ModelEntry { name: "okt_flat", params: "-", algebra: "N=8 Hermitian", anchor: "Eqs. (41)-(43)" },
        ModelEntry { name: "instanton", params: "rho: real | \"inf\"", algebra: "N=4 + su(2) L^a", anchor: "Eqs. (44)-(45)" },
        ModelEntry { name: "gauge_sym3", params: "-", algebra: "Q^2 = A_- G (Gauss law)", anchor: "Eqs. (47)-(51)" },
        ModelEntry { name: "gauge_sym3_resolved", params: "g0: real", algebra: "exploratory", anchor: "Eqs. (52)-(54)" },
        ModelEntry { name: "wz_modes", params: "modes: [[n1,n2,n3]] (≤ 4)", algebra: "N=4 with central charges P_j", anchor: "Eqs. (55)-(66)" },
        ModelEntry { name: "wz_interacting", params: "Wprime: expr(phibar)", algebra: "exploratory (zero mode)", anchor: "Eq. (67)" },
    ]
}

pub fn catalog_text() -> String {
    let mut s = format!("{:<20} {:<34} {:<66} {}\n", "model", "expected algebra", "parameters", "anchor");
    for e in catalog() {
        s.push_str(&format!("{:<20} {:<34} {:<66} {}\n", e.name, e.algebra, e.params, e.anchor));
    }
    s.push_str("\nany model also accepts [model.rotate] B = matrix, kind = holomorphic|antiholomorphic\n");
    s
}
