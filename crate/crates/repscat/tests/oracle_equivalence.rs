use repscat::discretization::grid::{Channel, GridConfig};
use repscat::discretization::potential::{PotentialSpec, QProfile};
use repscat::oracle::{airy_smatrix, ode_harmonic_smatrix, ode_smatrix};
use repscat::scattering::smatrix::{frobenius_diff, scattering_matrix, ScatteringOptions};
use repscat::scattering::ChannelSet;

fn cfg(length: f64) -> GridConfig {
    GridConfig {
        length,
        n_min: 0,
        ..GridConfig::default()
    }
}

#[test]
fn free_line_pipeline_matches_airy() {
    let set = ChannelSet::new(&PotentialSpec::free(1.0, 1), &cfg(60.0), 0).unwrap();
    for l in [0.5, 1.0, 2.0] {
        let s = scattering_matrix(&set, l, &ScatteringOptions::default()).unwrap();
        let d = frobenius_diff(&s.matrix, &airy_smatrix(l).matrix);
        println!("lambda {l}: {d:.2e}");
        assert!(d < 1e-6);
    }
}

#[test]
fn line_with_short_range_q_matches_shooting() {
    let spec = PotentialSpec::with_q(0.8, 1, QProfile::Power { coupling: 0.6, exponent: 3.0 }, 1.0);
    let set = ChannelSet::new(&spec, &cfg(120.0), 0).unwrap();
    let s = scattering_matrix(&set, 0.7, &ScatteringOptions::default()).unwrap();
    let o = ode_smatrix(0.7, &spec, Channel::Line).unwrap();
    let d = frobenius_diff(&s.matrix, &o.matrix);
    println!("line q: {d:.2e}");
    assert!(d < 1e-5);
}

#[test]
fn radial_harmonics_match_shooting() {
    let spec = PotentialSpec::with_q(1.3, 3, QProfile::Gauss { coupling: 0.8, width: 2.0 }, 1.0);
    let set = ChannelSet::new(&spec, &cfg(100.0), 2).unwrap();
    let s = scattering_matrix(&set, 1.0, &ScatteringOptions::default()).unwrap();
    let o = ode_harmonic_smatrix(1.0, &spec, 2).unwrap();
    let d = frobenius_diff(&s.matrix, &o.matrix);
    println!("radial: {d:.2e}");
    assert!(d < 1e-5);
}

#[test]
fn two_dimensional_s_wave_selects_regular_branch() {
    let spec = PotentialSpec::with_q(0.8, 2, QProfile::Power { coupling: -0.4, exponent: 3.0 }, 1.0);
    let set = ChannelSet::new(&spec, &cfg(100.0), 1).unwrap();
    let s = scattering_matrix(&set, 0.5, &ScatteringOptions::default()).unwrap();
    let o = ode_harmonic_smatrix(0.5, &spec, 1).unwrap();
    let d = frobenius_diff(&s.matrix, &o.matrix);
    println!("d = 2: {d:.2e}");
    assert!(d < 1e-5);
}
