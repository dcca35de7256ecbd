use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use ecs_metrology_ffi::*;

struct Handles {
    probe: *mut EcsProbe,
    scenario: *mut EcsScenario,
}

impl Handles {
    fn new(alpha: f64, beta: f64, sign: EcsSign, model: EcsLossModel, rate: f64) -> Self {
        let mut probe = ptr::null_mut();
        let mut scenario = ptr::null_mut();
        unsafe {
            assert_eq!(ecs_probe_new(alpha, beta, sign, &mut probe), EcsStatus::Ok);
            assert_eq!(ecs_scenario_new(model, rate, 0.0, &mut scenario), EcsStatus::Ok);
        }
        Self { probe, scenario }
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            ecs_probe_free(self.probe);
            ecs_scenario_free(self.scenario);
        }
    }
}

fn last_error() -> String {
    let p = ecs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn values_match_the_library() {
    let h = Handles::new(1.0, 0.3, EcsSign::Plus, EcsLossModel::BothArms, 0.2);
    let mut q = 0.0;
    let mut o = 0.0;
    let mut n = 0.0;
    let mut mean = 0.0;
    let mut doe = 0.0;
    let mut eco = 0.0;
    unsafe {
        assert_eq!(ecs_qfi(h.probe, h.scenario, &mut q), EcsStatus::Ok);
        assert_eq!(ecs_oracle_qfi(h.probe, h.scenario, 0, &mut o), EcsStatus::Ok);
        assert_eq!(ecs_negativity(h.probe, h.scenario, &mut n), EcsStatus::Ok);
        assert_eq!(ecs_mean_photon_a(h.probe, &mut mean), EcsStatus::Ok);
        assert_eq!(ecs_degree_of_entanglement(h.probe, &mut doe), EcsStatus::Ok);
        assert_eq!(ecs_eco_ratio(h.probe, h.scenario, &mut eco), EcsStatus::Ok);
    }
    assert!((q - 1.7658998100745).abs() < 1e-12);
    assert!((q - o).abs() < 1e-7);
    assert!(n > 0.0 && doe > 0.0 && doe <= 1.0);
    assert!((eco - q / mean).abs() < 1e-12);
    assert!(ecs_last_error_message().is_null());

    let mut sep = 0.0;
    unsafe { assert_eq!(ecs_separable_qfi(2.0, h.scenario, &mut sep), EcsStatus::Ok) };
    assert_eq!(sep, 4.0 * 0.8 * 4.0);
}

#[test]
fn optimizer_reports_endpoint() {
    let h = Handles::new(0.6, 0.0, EcsSign::Plus, EcsLossModel::BothArms, 0.001);
    let mut opt = EcsEcoOptimum::default();
    unsafe { assert_eq!(ecs_optimize_beta(0.6, h.scenario, 401, &mut opt), EcsStatus::Ok) };
    assert!((opt.beta_opt + 0.30).abs() < 0.02);
    assert_eq!(opt.boundary, 0);
}

#[test]
fn errors_set_status_and_message() {
    let mut scenario = ptr::null_mut();
    let status = unsafe { ecs_scenario_new(EcsLossModel::BothArms, 1.5, 0.0, &mut scenario) };
    assert_eq!(status, EcsStatus::InvalidArgument);
    assert!(scenario.is_null());
    assert!(last_error().contains("1.5"));

    let mut probe = ptr::null_mut();
    let status = unsafe { ecs_probe_new(0.7, 0.7, EcsSign::Minus, &mut probe) };
    assert_eq!(status, EcsStatus::Unsupported);

    let h = Handles::new(3.0, 0.0, EcsSign::Plus, EcsLossModel::BothArms, 0.1);
    let mut v = 0.0;
    assert_eq!(unsafe { ecs_oracle_qfi(h.probe, h.scenario, 4, &mut v) }, EcsStatus::Numerical);
    assert!(last_error().contains("truncation"));

    assert_eq!(unsafe { ecs_qfi(ptr::null(), h.scenario, &mut v) }, EcsStatus::NullPointer);
    assert_eq!(unsafe { ecs_qfi(h.probe, h.scenario, ptr::null_mut()) }, EcsStatus::NullPointer);
    unsafe {
        ecs_probe_free(ptr::null_mut());
        ecs_scenario_free(ptr::null_mut());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ecs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ecs_metrology.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["ecs_probe_new", "ecs_qfi", "ecs_optimize_beta", "ecs_last_error_message", "ECS_STATUS_NUMERICAL"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(
        &src,
        "#include \"ecs_metrology.h\"\nint main(void) { EcsEcoOptimum o; (void)o; return ECS_STATUS_OK; }\n",
    )
    .unwrap();
    match Command::new("cc")
        .arg("-std=c99")
        .arg("-fsyntax-only")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; header syntax not checked"),
    }
}
