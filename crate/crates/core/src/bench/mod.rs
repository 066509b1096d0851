//! Experiment drivers shared by the command-line tool and the tests.

mod certify;
mod lemmas;
mod output;
mod table;

pub use certify::{certify, instance_suite, BenchRecord, RATIO_TOL};
pub use lemmas::{run_lemmas, EpsRow, LemmaReport};
pub use output::{format_sig, opt_sig, write_csv, write_json, CsvRow};
pub use table::{ratio_table, ward_zivny_ratio, RatioRow};
