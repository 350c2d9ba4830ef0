use sha2::{Digest, Sha256};
use trobust::data::STACKLOSS_CSV;
use trobust::Dataset;

#[test]
fn stackloss_fixture_is_pinned() {
    let digest = Sha256::digest(STACKLOSS_CSV.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, "b511cb73f27e84889a29ac19a19423e9f3a1f13053d925c4f8edd1ffd86f5494");
    let d = Dataset::stackloss();
    assert_eq!((d.n(), d.p()), (21, 4));
    assert_eq!(d.y()[0], 42.0);
    assert_eq!(d.y()[20], 15.0);
}
