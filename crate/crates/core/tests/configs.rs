use std::path::PathBuf;

use domino_core::figures::Figure;
use domino_core::params::load_config;

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn bundled_configs_match_built_in_bases() {
    let cases = [
        ("fig2.toml", Figure::Fig2, 2),
        ("fig3.toml", Figure::Fig3, 2),
        ("fig4.toml", Figure::Fig4, 2),
        ("fig5.toml", Figure::Fig5, 2),
        ("fig6_n3.toml", Figure::Fig6, 3),
        ("fig6_n4.toml", Figure::Fig6, 4),
    ];
    for (file, fig, n) in cases {
        let loaded = load_config(bundled(file)).unwrap();
        assert_eq!(loaded, fig.default_base(n), "{file}");
    }
}
