//! Per-candidate gains on the ten-vertex example, then the built-in check of
//! every worked cell.

use kbm_igs::dp::{kbm_dp_gain_all, DpTable};
use kbm_igs::fixtures::{toy10, verify_fixtures, FixtureOptions};
use kbm_igs::single::dfs_gain_all;
use kbm_igs::{Answer, Mode, SessionState};

fn print_rows(h: &kbm_igs::Hierarchy, rows: &[kbm_igs::gain::GainRow]) {
    println!("  vertex  gYes  gNo   pYes   pNo    gain");
    for r in rows {
        println!(
            "  {:<6} {:>5} {:>4} {:>6.3} {:>6.3} {:>6.2}",
            h.key(r.vertex),
            r.g_yes,
            r.g_no,
            r.p_yes,
            r.p_no,
            r.gain
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = toy10();

    println!("single target, first round:");
    let s = SessionState::new(&h, Mode::Single, 2, 1)?;
    print_rows(&h, &dfs_gain_all(&h, &s));

    println!("two targets, k = 2, after v3 = Yes:");
    let mut m = SessionState::new(&h, Mode::Multi, 2, 2)?;
    m.apply_answer(&h, h.lookup("v3").unwrap(), Answer::Yes)?;
    print_rows(&h, &kbm_dp_gain_all(&h, &m, &DpTable::build(&h, &m)));

    print!("{}", verify_fixtures(&h, &FixtureOptions::default())?);
    Ok(())
}
