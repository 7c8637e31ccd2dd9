//! Sample one network, build its secrecy graph and dump the edge list.

use isgraph::channel::ChannelParams;
use isgraph::graph::{build, component, write_dump, ComponentKind, EdgeRule};
use isgraph::spatial::{sample_poisson_seeded, PointKind, Window};

fn main() -> isgraph::Result<()> {
    let window = Window::new(5.0, 0.0)?;
    let legit = sample_poisson_seeded(1.0, window, PointKind::Legitimate, 7)?.with_probe();
    let eves = sample_poisson_seeded(0.2, window, PointKind::Eavesdropper, 8)?;
    let channel = ChannelParams::path_loss_only(10.0, 2.0, 0.0)?;
    let g = build(&EdgeRule::Baseline, &channel, &legit, &eves, 9)?;

    println!("{} nodes, {} directed edges", g.len(), g.edge_count());
    let probe = 0;
    for kind in [ComponentKind::Out, ComponentKind::In, ComponentKind::Weak, ComponentKind::Strong] {
        println!("probe {:>6} component: {} nodes", kind.label(), component(&g, probe, kind).len());
    }

    let mut buf = Vec::new();
    write_dump(&g, &mut buf)?;
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines().take(5) {
        println!("{line}");
    }
    Ok(())
}
