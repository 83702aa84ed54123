use tsd_core::builders::standardized_fixture;
fn main() {
    let mut failures = 0;
    for i in 0..20 {
        match standardized_fixture(i) {
            Ok(d) => {
                let def = tsd_core::transversality::deficit_vector(&d).unwrap();
                let neg = def.entries.iter().any(|x| x <= &tsd_core::rat::zero());
                if !neg { println!("fixture {i}: NO NEGATIVE ENTRY"); failures += 1; }
            }
            Err(e) => { println!("fixture {i}: FAIL {e}"); failures += 1; }
        }
    }
    println!("failures: {failures}");
}
