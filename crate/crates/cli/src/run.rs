//! Evaluation of one sweep point per mode.

use casimir::casimir_polder::{cp_energy_dielectric, cp_energy_perfect_conductor, AtomScene, CpOptions};
use casimir::gratings::{grating_energy_t0, grating_free_energy, lateral_force, GratingOptions, GratingScene};
use casimir::lifshitz::{
    asymptote_graphene_metal_high_t, asymptote_ideal_high_t, energy_per_area_t0, free_energy_per_area, pressure, zero_frequency_terms,
    LifshitzOptions, PlanePlaneScene, PolarizationSplit,
};
use casimir::materials::{AtomicResponse, Polarizability};
use casimir::quadrature::Tolerance;
use casimir::reflection::Reflector;

use crate::config::Mode;
use crate::plan::{AsymptoticPair, Atom, Material, Plan, PointParams};
use crate::units;

/// One output value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
}

/// Column names for a mode, after the swept-variable column and before `status`.
pub fn columns(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::PlanePlane => &[
            "energy_per_area_J_m2",
            "pressure_Pa",
            "energy_per_area_nat",
            "pressure_nat",
            "error_nat",
            "matsubara_terms",
            "tol",
            "max_terms",
        ],
        Mode::CasimirPolder => &["energy_J", "force_N", "energy_nat", "force_nat", "error_nat", "tol"],
        Mode::Grating => &[
            "energy_per_area_J_m2",
            "lateral_force_Pa",
            "energy_per_area_nat",
            "lateral_force_nat",
            "error_nat",
            "J",
            "matsubara_terms",
            "tol",
            "max_terms",
        ],
        Mode::Asymptotics => &[
            "n0_te_J_m2",
            "n0_tm_J_m2",
            "closed_te_J_m2",
            "closed_tm_J_m2",
            "n0_te_nat",
            "n0_tm_nat",
            "closed_te_nat",
            "closed_tm_nat",
            "tol",
        ],
    }
}

/// Row of NaNs (with the metadata filled in) for a failed point.
pub fn failed_row(plan: &Plan) -> Vec<Cell> {
    let n = &plan.numerics;
    columns(plan.mode)
        .iter()
        .map(|c| match *c {
            "tol" => Cell::Float(n.tol),
            "max_terms" => Cell::Int(n.max_terms as u64),
            "J" => Cell::Int(n.order as u64),
            "matsubara_terms" => Cell::Int(0),
            _ => Cell::Float(f64::NAN),
        })
        .collect()
}

fn tolerance(plan: &Plan) -> casimir::Result<Tolerance> {
    Tolerance::new(plan.numerics.tol, 0.0)
}

/// Error estimate reported when the routine gives none: the requested relative tolerance.
fn nominal_error(plan: &Plan, value: f64) -> f64 {
    plan.numerics.tol * value.abs()
}

pub fn evaluate(plan: &Plan, p: &PointParams) -> casimir::Result<Vec<Cell>> {
    match plan.mode {
        Mode::PlanePlane => plane_plane(plan, p),
        Mode::CasimirPolder => casimir_polder(plan, p),
        Mode::Grating => grating(plan, p),
        Mode::Asymptotics => asymptotics(plan, p),
    }
}

fn plane_plane(plan: &Plan, p: &PointParams) -> casimir::Result<Vec<Cell>> {
    let t = p.temperature();
    let scene = PlanePlaneScene::new(plan.materials[0].surface(t)?, plan.materials[1].surface(t)?, p.a_nm, t)?;
    let opts = LifshitzOptions { tolerance: tolerance(plan)?, max_terms: plan.numerics.max_terms };
    let (energy, error, terms) = if t == 0.0 {
        let e = energy_per_area_t0(&scene, &opts)?;
        (e, nominal_error(plan, e), 0)
    } else {
        let s = free_energy_per_area(&scene, &opts)?;
        (s.value, s.tail.abs().max(nominal_error(plan, s.value)), s.terms)
    };
    let p_nat = if plan.numerics.force { pressure(&scene, &opts)? } else { f64::NAN };
    Ok(vec![
        Cell::Float(energy * units::ENERGY_PER_AREA),
        Cell::Float(p_nat * units::PRESSURE),
        Cell::Float(energy),
        Cell::Float(p_nat),
        Cell::Float(error),
        Cell::Int(terms as u64),
        Cell::Float(plan.numerics.tol),
        Cell::Int(plan.numerics.max_terms as u64),
    ])
}

fn response(alpha0: f64, omega0: Option<f64>) -> AtomicResponse {
    match omega0 {
        Some(omega0) => AtomicResponse::Lorentz { alpha0, omega0 },
        None => AtomicResponse::Static(alpha0),
    }
}

fn polarizability(atom: &Atom) -> casimir::Result<Polarizability> {
    let in_plane = response(atom.alpha0, atom.omega0);
    Polarizability::new(in_plane, in_plane, response(atom.alpha0_zz, atom.omega0_zz))
}

fn casimir_polder(plan: &Plan, p: &PointParams) -> casimir::Result<Vec<Cell>> {
    let atom = plan.atom.as_ref().expect("plan carries an atom in casimir-polder mode");
    let surface = plan.materials[0].surface(0.0)?;
    let alpha = polarizability(atom)?;
    let opts = CpOptions { tolerance: tolerance(plan)? };
    let energy_at = |a: f64| {
        let scene = AtomScene::new(alpha, a, surface.clone())?;
        if scene.surface.is_ideal() {
            cp_energy_perfect_conductor(&scene, &opts)
        } else {
            cp_energy_dielectric(&scene, &opts)
        }
    };
    let a = p.a_nm;
    let energy = energy_at(a)?;
    let force = if plan.numerics.force {
        // -∂E/∂a: central differences at steps h and h/2, one Richardson step
        let h = 1e-3 * a;
        let coarse = -(energy_at(a + h)? - energy_at(a - h)?) / (2.0 * h);
        let fine = -(energy_at(a + 0.5 * h)? - energy_at(a - 0.5 * h)?) / h;
        (4.0 * fine - coarse) / 3.0
    } else {
        f64::NAN
    };
    Ok(vec![
        Cell::Float(energy * units::ENERGY),
        Cell::Float(force * units::FORCE),
        Cell::Float(energy),
        Cell::Float(force),
        Cell::Float(nominal_error(plan, energy)),
        Cell::Float(plan.numerics.tol),
    ])
}

fn grating(plan: &Plan, p: &PointParams) -> casimir::Result<Vec<Cell>> {
    let t = p.temperature();
    let lower = plan.materials[0].grating_profile(p.h_nm, p.d_nm)?;
    let upper = plan.materials[1].grating_profile(p.h_nm, p.d_nm)?;
    let scene = GratingScene::new(lower, upper, p.l_nm, p.s_nm, p.d_nm, t)?;
    let opts = GratingOptions { tolerance: tolerance(plan)?, max_terms: plan.numerics.max_terms, ..Default::default() };
    let e = if t == 0.0 {
        grating_energy_t0(&scene, plan.numerics.order, &opts)?
    } else {
        grating_free_energy(&scene, plan.numerics.order, &opts)?
    };
    let force = if plan.numerics.force { lateral_force(&scene, e.order, &opts)? } else { f64::NAN };
    Ok(vec![
        Cell::Float(e.value * units::ENERGY_PER_AREA),
        Cell::Float(force * units::PRESSURE),
        Cell::Float(e.value),
        Cell::Float(force),
        Cell::Float(nominal_error(plan, e.value)),
        Cell::Int(e.order as u64),
        Cell::Int(e.terms as u64),
        Cell::Float(plan.numerics.tol),
        Cell::Int(plan.numerics.max_terms as u64),
    ])
}

fn asymptotics(plan: &Plan, p: &PointParams) -> casimir::Result<Vec<Cell>> {
    let t = p.temperature();
    let a = p.a_nm;
    let scene = PlanePlaneScene::new(plan.materials[0].surface(t)?, plan.materials[1].surface(t)?, a, t)?;
    let opts = LifshitzOptions { tolerance: tolerance(plan)?, max_terms: plan.numerics.max_terms };
    let numeric = zero_frequency_terms(&scene, &opts)?;
    let closed = match plan.asymptotic_pair.expect("plan carries the pair in asymptotics mode") {
        AsymptoticPair::IdealIdeal => {
            let half = 0.5 * asymptote_ideal_high_t(a, t);
            PolarizationSplit { te: half, tm: half }
        }
        AsymptoticPair::GrapheneMetal { graphene_first } => {
            let g = if graphene_first { &plan.materials[0] } else { &plan.materials[1] };
            let Material::Graphene { alpha, species, fermi_velocity } = *g else {
                unreachable!("asymptotic pair was validated as graphene-metal")
            };
            asymptote_graphene_metal_high_t(a, t, alpha, species, fermi_velocity)
        }
    };
    let nat = [numeric.te, numeric.tm, closed.te, closed.tm];
    let mut row: Vec<Cell> = nat.iter().map(|v| Cell::Float(v * units::ENERGY_PER_AREA)).collect();
    row.extend(nat.iter().map(|v| Cell::Float(*v)));
    row.push(Cell::Float(plan.numerics.tol));
    Ok(row)
}
