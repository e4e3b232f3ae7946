use std::fs;
use std::path::PathBuf;

use recalib::{Forecast64, Forecaster};
use recalib_cli::{
    fit_model, forecast_row, ingest_dataset, ingest_demand_trace, ingest_forecasts, write_forecasts, ModelDocument,
    ModelKind, ModelParams,
};
use tempfile::TempDir;

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn dataset_with_one_feature() {
    let dir = TempDir::new().unwrap();
    let d = ingest_dataset(&file(&dir, "d.csv", "x0,y\n1.5,2\n-3,4.25\n")).unwrap();
    assert_eq!((d.len(), d.dim()), (2, 1));
    assert_eq!(d.x(1), &[-3.0]);
    assert_eq!(d.targets(), &[2.0, 4.25]);
}

#[test]
fn target_only_dataset() {
    let dir = TempDir::new().unwrap();
    let d = ingest_dataset(&file(&dir, "d.csv", "y\n1\n2\n3\n")).unwrap();
    assert_eq!((d.len(), d.dim()), (3, 0));
}

#[test]
fn dataset_errors_name_their_cell() {
    let dir = TempDir::new().unwrap();
    let nan = file(&dir, "nan.csv", "x0,x1,y\n1,2,3\n4,5,6\n7,NaN,9\n");
    let msg = ingest_dataset(&nan).unwrap_err().to_string();
    assert!(msg.contains("row 3, column x1"), "{msg}");

    let text = file(&dir, "text.csv", "x0,y\n1,abc\n");
    assert!(ingest_dataset(&text)
        .unwrap_err()
        .to_string()
        .contains("row 1, column y"));

    let no_y = file(&dir, "no_y.csv", "x0,x1\n1,2\n");
    assert!(ingest_dataset(&no_y).unwrap_err().to_string().contains("missing y"));

    let ragged = file(&dir, "ragged.csv", "x0,y\n1,2\n3\n");
    let msg = ingest_dataset(&ragged).unwrap_err().to_string();
    assert!(msg.contains("row 2"), "{msg}");
}

#[test]
fn forecast_rows() {
    let dir = TempDir::new().unwrap();
    let path = file(
        &dir,
        "f.csv",
        "# comment\ngaussian,0,1,0.3\nstudent_t,0,1,4,0.1\nqgrid,0.1:-1;0.9:1,0.5\npoint_distance,2,2.5\n",
    );
    let (fs, ys) = ingest_forecasts(&path).unwrap();
    assert_eq!(ys, vec![0.3, 0.1, 0.5, 2.5]);
    assert_eq!(fs[0], Forecast64::gaussian(0.0, 1.0).unwrap());
    assert_eq!(fs[1], Forecast64::student_t(0.0, 1.0, 4.0).unwrap());
    assert_eq!(fs[2], Forecast64::quantile_grid(vec![(0.1, -1.0), (0.9, 1.0)]).unwrap());
    assert_eq!(fs[3], Forecast64::point_distance(2.0).unwrap());
}

#[test]
fn forecast_errors_are_per_row() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("gaussian,0,1,0.3\ngaussian,0,0,0.3\n", "row 2"),
        ("weibull,1,2,3\n", "unknown forecast family"),
        ("student_t,0,1,0.1\n", "5 fields"),
        ("qgrid,0.1-1,0\n", "p:y"),
    ];
    for (i, (text, want)) in cases.iter().enumerate() {
        let path = file(&dir, &format!("bad{i}.csv"), text);
        let msg = ingest_forecasts(&path).unwrap_err().to_string();
        assert!(msg.contains(want), "{msg}");
    }
}

#[test]
fn written_forecasts_read_back_unchanged() {
    let fs = vec![
        Forecast64::gaussian(0.1, 1.0 / 3.0).unwrap(),
        Forecast64::student_t(-2.0, 0.7, 3.5).unwrap(),
        Forecast64::quantile_grid(vec![(0.0, -1e-7), (0.5, 0.2), (1.0, 1e7)]).unwrap(),
        Forecast64::point_distance(std::f64::consts::PI).unwrap(),
    ];
    let ys = vec![0.1 + 0.2, -1.0, 3.0, 1e-300];
    let dir = TempDir::new().unwrap();
    let path = file(&dir, "f.csv", &write_forecasts(&fs, &ys, 9));
    let (back, back_ys) = ingest_forecasts(&path).unwrap();
    assert_eq!(back, fs);
    assert_eq!(back_ys, ys);
    assert_eq!(forecast_row(&fs[0], 1.0), "gaussian,0.1,0.3333333333333333,1");
}

#[test]
fn model_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let rows: String = (0..30)
        .map(|i| {
            let x = i as f64 / 7.0;
            format!("{x},{}\n", 1.0 + 2.0 * x + ((i * 37) % 11) as f64 / 10.0)
        })
        .collect();
    let data = ingest_dataset(&file(&dir, "d.csv", &format!("x0,y\n{rows}"))).unwrap();
    for kind in [
        ModelKind::BayesRidge,
        ModelKind::Heteroscedastic,
        ModelKind::PointDistance,
    ] {
        let params = ModelParams {
            kind,
            prior_scale: 0.5,
            a0: 2.0,
            b0: 1.5,
            sigma_floor: 1e-3,
        };
        let model = fit_model(&data, &params).unwrap();
        let doc = ModelDocument::new(&model, 3);
        let back = ModelDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.seed(), 3);
        let rebuilt = back.model().unwrap();
        for x in [-1.0, 0.3, 2.0] {
            assert_eq!(
                rebuilt.forecast(&[x]).unwrap(),
                model.forecast(&[x]).unwrap(),
                "{kind:?}"
            );
        }
    }
}

#[test]
fn demand_traces() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        ingest_demand_trace(&file(&dir, "a.csv", "demand\n3\n0\n12\n")).unwrap(),
        vec![3, 0, 12]
    );
    assert_eq!(ingest_demand_trace(&file(&dir, "b.csv", "5\n")).unwrap(), vec![5]);
    let msg = ingest_demand_trace(&file(&dir, "c.csv", "1\n-2\n"))
        .unwrap_err()
        .to_string();
    assert!(msg.contains("row 2"), "{msg}");
}
