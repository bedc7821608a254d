//! Snapping continuous intervals onto the integer labels of a 1-5 scale.
//!
//! ```text
//! cargo run --example boundary_adjustment
//! ```

use judgecp::conformal::{boundary_adjust, AdjustDirection};
use judgecp::domain::{clamp_interval, Interval, RatingScale};

fn show(v: Option<i32>) -> String {
    v.map_or("-".into(), |x| x.to_string())
}

fn main() {
    let scale = RatingScale::likert5();
    let raw = [(2.3, 4.7), (2.2, 2.8), (3.0, 3.0), (-0.4, 1.6), (4.1, 7.0)];
    println!(
        "{:<16} {:<16} {:<10} {:<10}",
        "raw", "clamped", "outward", "inward"
    );
    for (l, u) in raw {
        let c = clamp_interval(Interval::new(l, u), &scale);
        let out = boundary_adjust(c, &scale, AdjustDirection::Outward);
        let inw = boundary_adjust(c, &scale, AdjustDirection::Inward);
        println!(
            "{:<16} {:<16} {:<10} {:<10}",
            format!("[{l}, {u}]"),
            format!("[{}, {}]", c.lower, c.upper),
            format!("[{}, {}]", show(out.adj_lower), show(out.adj_upper)),
            format!("[{}, {}]", show(inw.adj_lower), show(inw.adj_upper)),
        );
    }
}
