use std::process::Command;

use worms::dsl::{parse_expr, parse_worm};
use worms::Chart;

const WORMS: &[&str] = &[
    "0",
    "1",
    "x",
    "-x",
    "3/2*x*y",
    "x^3 - 2*x*y + z",
    "2*x*d{1}x",
    "d{1}x*d{1}x",
    "d{2}x*d{1}x",
    "d{1,2}x",
    "d{1,2}x^2",
    "d{1}x*d{2}y - d{1}y*d{2}x",
    "x*d{1,2}y + y*d{1,2}x",
    "sin(x)*d{1}x",
    "exp(x*y)*d{1}y*d{2}z",
    "(x + y)^2*d{1}x",
    "d{1}x*(y*d{2}y + d{2}z)",
    "d{1}z*d{1}y*d{1}x",
    "-1/3*d{1,2}z*d{1}x*d{2}y",
    "cos(x)^2 + sin(x)^2",
    "x/y*d{1}x",
    "log(1 + x^2)*d{2}x",
    "sqrt(x)*d{1}y",
    "d{1}x + d{2}x + d{1,2}x",
    "(d{1}x + d{2}y)*(d{1}y - d{2}x)",
    "x^-2*d{1}y*d{1,2}y",
    "2*(x - y)*d{1}x*d{2}x",
    "d{1,2}x*d{1,2}y*d{1,2}z",
    "0*d{1}x",
    "x*y*z*d{1}x*d{1}y*d{1}z*d{2}x*d{2}y*d{2}z",
];

const SCALARS: &[&str] = &[
    "1/2",
    "-7/3",
    "x + y + z",
    "x*x*x",
    "(x + 1)*(x - 1)",
    "sin(th)^2",
    "exp(-x^2 - y^2)",
    "sqrt(x)^3",
    "exp(x*log(2))",
    "cos(sin(x))",
    "a/b/c",
    "a - (b - c)",
    "-(-x)",
    "3*x/4",
    "sin(x)/cos(x) + log(x)",
    "(exp(x) - exp(-x))*cos(y)/2",
    "1/(1 + x^2)",
    "x^2*y^3*z^-1",
    "4*r^2/(1 + x^2 + y^2)^2",
    "exp(x)*exp(-x)",
];

#[test]
fn fifty_strings_round_trip() {
    assert_eq!(WORMS.len() + SCALARS.len(), 50);
    let chart = Chart::new("U", &["x", "y", "z"], 2).unwrap();
    for src in WORMS {
        let w = parse_worm(&chart, src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let printed = w.to_string();
        let again = parse_worm(&chart, &printed).unwrap_or_else(|e| panic!("{src} -> {printed}: {e}"));
        assert_eq!(w, again, "{src} -> {printed}");
        assert_eq!(again.to_string(), printed);
    }
    for src in SCALARS {
        let e = parse_expr(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let printed = e.to_string();
        let again = parse_expr(&printed).unwrap_or_else(|err| panic!("{src} -> {printed}: {err}"));
        assert_eq!(e, again, "{src} -> {printed}");
    }
}

#[test]
fn cli_prints_the_library_normal_form() {
    let chart = Chart::new("U", &["x", "y", "z"], 2).unwrap();
    for src in WORMS.iter().step_by(3) {
        let out = Command::new(env!("CARGO_BIN_EXE_worm"))
            .args(["eval", "--coords", "x,y,z", "--k", "2", "--expr", src])
            .output()
            .unwrap();
        assert!(out.status.success(), "{src}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.trim(), parse_worm(&chart, src).unwrap().to_string());
    }
}
