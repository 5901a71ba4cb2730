use chrono::{Days, NaiveDate};
use excessvol::data_ingest::{load_quadruple, log_returns, read_quadruple, save_quadruple, write_quadruple, ColumnMapping, MarketQuadruple};
use proptest::prelude::*;

#[test]
fn loads_a_file_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quad.csv");
    std::fs::write(
        &path,
        "date,spx_close,vix_close,ust10y_yield,tyvix_close\n\
         2014-01-02,1831.98,14.23,2.99,6.1\n\
         2014-01-03,1831.37,,3.01,5.9\n\
         2014-01-06,1826.77,13.55,2.98,5.8\n",
    )
    .unwrap();
    let (q, report) = load_quadruple(&path, &ColumnMapping::default()).unwrap();
    assert_eq!(q.len(), 2);
    assert_eq!(report.rows_dropped, 1);
    assert!(load_quadruple(dir.path().join("absent.csv"), &ColumnMapping::default()).is_err());
}

#[test]
fn extra_columns_are_ignored() {
    let text = "note,tyvix_close,date,vix_close,spx_close,ust10y_yield\nx,5,2014-01-02,14,1800,3\n";
    let (q, _) = read_quadruple(text.as_bytes(), &ColumnMapping::default()).unwrap();
    assert_eq!((q.spx()[0], q.vix()[0], q.yield10()[0], q.tyvix()[0]), (1800.0, 14.0, 3.0, 5.0));
}

#[test]
fn missing_column_is_a_parse_error() {
    let text = "date,spx_close,vix_close,ust10y_yield\n2014-01-02,1,2,3\n";
    assert!(read_quadruple(text.as_bytes(), &ColumnMapping::default()).is_err());
}

fn quadruple_strategy() -> impl Strategy<Value = MarketQuadruple> {
    let row = (1e-3f64..1e5, 1e-3f64..200.0, -5.0f64..20.0, 1e-3f64..50.0, 1u64..5);
    prop::collection::vec(row, 1..40).prop_map(|rows| {
        let mut d = NaiveDate::from_ymd_opt(2014, 1, 2).unwrap();
        let mut dates = Vec::new();
        for r in &rows {
            d = d + Days::new(r.4);
            dates.push(d);
        }
        MarketQuadruple::new(
            dates,
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.2).collect(),
            rows.iter().map(|r| r.3).collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn reload_is_bit_exact(q in quadruple_strategy()) {
        let mapping = ColumnMapping::default();
        let mut buf = Vec::new();
        write_quadruple(&mut buf, &q, &mapping).unwrap();
        let (back, report) = read_quadruple(buf.as_slice(), &mapping).unwrap();
        prop_assert_eq!(report.rows_dropped, 0);
        prop_assert_eq!(&back, &q);
        let mut again = Vec::new();
        write_quadruple(&mut again, &back, &mapping).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn log_returns_telescope(levels in prop::collection::vec(1e-3f64..1e4, 2..300)) {
        let r = log_returns(&levels).unwrap();
        prop_assert_eq!(r.len(), levels.len() - 1);
        let total: f64 = r.iter().sum();
        let direct = (levels[levels.len() - 1] / levels[0]).ln();
        prop_assert!((total - direct).abs() < 1e-12);
    }
}

#[test]
fn save_then_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let mapping = ColumnMapping { delimiter: b'\t', ..ColumnMapping::default() };
    let q = MarketQuadruple::new(
        vec![NaiveDate::from_ymd_opt(2018, 12, 31).unwrap()],
        vec![2506.85],
        vec![25.42],
        vec![2.69],
        vec![5.6],
    )
    .unwrap();
    save_quadruple(&path, &q, &mapping).unwrap();
    assert_eq!(load_quadruple(&path, &mapping).unwrap().0, q);
}
