//! Values frozen from an independent 40-digit evaluation of the closed forms.

use rbc_core::channel::{chi, ChannelSpec, Visibility};
use rbc_core::electro_beam::{beam_power, eta_eb, lasing_threshold, peak_eta_eb};
use rbc_core::link::{eta_om, g_quadratic, optimal_source_power, output_power_pm};
use rbc_core::pv::eta_bem;
use rbc_core::{CelsiusTemp, Efficiency, LinkConfig, OperatingPoint, PowerW, SqrtFitCoeffs};

fn close(got: f64, want: f64, rel: f64) {
    assert!(
        ((got - want) / want).abs() <= rel,
        "got {got}, want {want} (rel {rel})"
    );
}

#[test]
fn transmitter() {
    let c = SqrtFitCoeffs::default();
    let ps = PowerW::new(40.0).unwrap();
    close(beam_power(ps, &c).get(), 11.610787321612811, 1e-14);
    close(eta_eb(ps, &c).unwrap().get(), 0.2902696830403203, 1e-14);
    close(lasing_threshold(&c).get(), 2.756541809828273, 1e-12);
    let (p, e) = peak_eta_eb(&c).unwrap();
    close(p.get(), 17.4655, 1e-5);
    close(e.get(), 0.316647, 1e-5);
}

#[test]
fn channel() {
    close(
        ChannelSpec::new(1550.0, 30.0, 5.0).eta_bt().unwrap().get(),
        0.8832149276563939,
        1e-14,
    );
    close(ChannelSpec::new(1550.0, 30.0, 0.0).max_range(0.8833).unwrap(), 4.996122105474522, 1e-12);
    close(chi(4.0).unwrap(), 0.9286296154013967, 1e-14);

    let table = [
        (Visibility::Average, [0.91171, 0.62992, 0.39680]),
        (Visibility::Low, [0.68834, 0.15453, 0.023879]),
    ];
    for (vis, expected) in table {
        for (r, want) in [1.0, 5.0, 10.0].into_iter().zip(expected) {
            let got = ChannelSpec::new(1550.0, vis.km(), r).eta_bt().unwrap().get();
            close(got, want, 5e-5);
        }
    }
}

#[test]
fn end_to_end() {
    let cfg = LinkConfig::default();
    let pm = output_power_pm(&OperatingPoint::new(40.0, 1.0, 25.0).unwrap(), &cfg).unwrap();
    close(pm.get(), 5.482111007431018, 1e-14);
    close(
        eta_om(&OperatingPoint::new(40.0, 0.7, 0.0).unwrap(), &cfg).unwrap().get(),
        0.09222766129307543,
        1e-13,
    );
    close(
        eta_om(&OperatingPoint::new(40.0, 1.0, 25.0).unwrap(), &cfg).unwrap().get(),
        0.12211402269052594,
        1e-13,
    );

    let mpp25 = cfg.mpp_coeffs_at(CelsiusTemp::new(25.0).unwrap()).unwrap();
    close(g_quadratic(0.0, 1.0, &cfg.sqrt_coeffs, &mpp25), -16.9881, 1e-5);
    close(eta_bem(PowerW::new(25.0).unwrap(), &mpp25).unwrap().get(), 0.485944, 1e-6);
}

#[test]
fn optimum_at_full_transmission() {
    let cfg = LinkConfig::default();
    let at = |t: f64| optimal_source_power(Efficiency::ONE, CelsiusTemp::new(t).unwrap(), &cfg).unwrap();

    let r = at(25.0);
    close(r.xi, 5.801239511952411, 1e-13);
    close(r.ps_star.get(), 23.45437987503785, 1e-13);
    close(r.eta_opt.get(), 0.127363114628814, 1e-13);
    close(r.pm_star.get(), 3.3526631566466826, 1e-13);

    for (t, xi, ps, eta) in [(0.0, 5.72130, 22.5333, 0.140944), (50.0, 5.89438, 24.5437, 0.113921)] {
        let r = at(t);
        close(r.xi, xi, 1e-5);
        close(r.ps_star.get(), ps, 1e-5);
        close(r.eta_opt.get(), eta, 1e-5);
    }
}
