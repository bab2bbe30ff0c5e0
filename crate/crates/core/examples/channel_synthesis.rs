// Draw one channel realization and look at how Bob's gain changes as a
// single antenna slides across the transmit region.

use fascovert::ao::fpa_layout;
use fascovert::channel::{channels, sample_realization, Position2D};
use fascovert::config::{Link, ScenarioConfig};

pub fn run_example() -> fascovert::Result<Vec<f64>> {
    let config = ScenarioConfig::reference();
    let real = sample_realization(&config, 7);
    let mut layout = fpa_layout(&config)?;
    for link in Link::ALL {
        let ch = channels(&layout, &real);
        println!("{link:?}: distance {:.1} m, |h|^2 = {:.3e}", config.distance(link), ch[link].norm_sqr());
    }

    // antenna 0 along the left edge, the others fixed
    let steps = 11;
    let half = config.region_side / 2.0;
    let mut gains = Vec::with_capacity(steps);
    for i in 0..steps {
        let y = -half + config.region_side * i as f64 / (steps - 1) as f64;
        layout.positions[0] = Position2D::new(-half, y);
        let h = channels(&layout, &real);
        let g = h[Link::Bob].row()[0].norm_sqr();
        println!("y = {y:+.3} m  |h_b,0|^2 = {g:.3e}");
        gains.push(g);
    }
    Ok(gains)
}

#[allow(dead_code)]
fn main() -> fascovert::Result<()> {
    run_example().map(drop)
}
