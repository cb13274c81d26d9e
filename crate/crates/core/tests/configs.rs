use std::path::Path;

use blimp_invert::harness::RunConfig;

fn load(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("config").join(name);
    let cfg = RunConfig::load(&path).unwrap();
    cfg.validate().unwrap();
    cfg
}

#[test]
fn sample_configs_load() {
    assert_eq!(load("ablation_250.toml").ablation.episodes, Some(250));
    let d = load("deploy_mbr5.toml").deploy;
    assert_eq!(d.real.bottom_weight, 0.00259);
    assert_eq!(d.mapping.scale[0], 0.7);
}
