//! Load a hierarchy, query it, and write it back out.

use kbm_igs::{Format, Hierarchy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = "animal\tpet\nanimal\twild\npet\tdog\npet\tcat\nwild\twolf\n";
    let h = Hierarchy::load(text.as_bytes(), Format::EdgeList)?;
    println!("{} vertices, height {}, max out-degree {}", h.len(), h.height(), h.max_out_degree());

    let dog = h.lookup("dog").expect("dog exists");
    let wild = h.lookup("wild").expect("wild exists");
    let path: Vec<&str> = h.root_path(dog).into_iter().map(|v| h.label(v)).collect();
    println!("path to dog: {}", path.join(" > "));
    println!("pet reaches dog: {}", h.is_ancestor(h.lookup("pet").unwrap(), dog));
    println!("wild reaches dog: {}", h.is_ancestor(wild, dog));
    println!("distance animal -> dog: {:?}", h.distance(h.root(), dog));
    println!("distance wild -> dog: {:?}", h.distance(wild, dog));

    let leaves: Vec<&str> = h.leaves().map(|v| h.label(v)).collect();
    println!("leaves: {leaves:?}");
    println!("as JSON: {}", h.to_json());
    println!("content hash: {}", &h.content_hash()[..16]);

    match Hierarchy::from_edge_list("a\tb\nb\ta\n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
