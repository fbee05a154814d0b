//! Rasterizer goldens. Each case is rendered, checked pixel-for-pixel against
//! a brute-force reference rasterizer, and compared byte-for-byte with the
//! PNG stored under `tests/goldens/`. Set `UPDATE_GOLDENS=1` to rewrite them.

#[path = "support/golden_cases.rs"]
mod golden_cases;

use golden_cases::{cases, check_all, encode, golden_dir, reference};
use vaprompt_core::skeleton::render_skeleton;

#[test]
fn goldens_match() {
    let update = std::env::var("UPDATE_GOLDENS").is_ok_and(|v| v == "1");
    let cases = cases();
    assert_eq!(cases.len(), 10);
    for c in &cases {
        let img = render_skeleton(&c.joints, &c.topo, &c.style, c.size).unwrap();
        assert_eq!(img, reference(c), "{}: differs from the reference rasterizer", c.name);
        let path = golden_dir().join(format!("{}.png", c.name));
        if !update {
            let golden = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(encode(&img), golden, "{}: PNG bytes differ from the golden", c.name);
        }
    }
    assert_eq!(check_all(update), Vec::<String>::new());
}

#[test]
fn vertical_capsule_pixels() {
    let c = &cases()[0];
    let img = render_skeleton(&c.joints, &c.topo, &c.style, c.size).unwrap();
    assert_eq!(img.get_pixel(10, 30).0, [255, 0, 0]);
    assert_eq!(img.get_pixel(13, 30).0, [255, 0, 0]);
    assert_eq!(img.get_pixel(14, 30).0, [0, 0, 0]);
    assert_eq!(img.get_pixel(30, 30).0, [0, 0, 0]);
    // joint disks of radius 4 at both ends
    assert_eq!(img.get_pixel(10, 1).0, [255, 255, 255]);
    assert_eq!(img.get_pixel(10, 0).0, [0, 0, 0]);
}
