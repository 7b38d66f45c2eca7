use super::*;
use crate::symcore::{cr_int, cr_ratio};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn quartic_sectors() {
    let v = Potential::polynomial(vec![cr_int(0), cr_int(0), cr_int(0), cr_int(1)]).unwrap();
    let s = sectors(&v).unwrap();
    let centers: Vec<f64> = s.iter().map(|x| x.center_angle).collect();
    for (c, e) in centers.iter().zip([0.0, 0.5 * PI, PI, 1.5 * PI]) {
        assert!(close(*c, e), "{centers:?}");
    }
    assert!(s.iter().all(|x| close(x.half_width, PI / 8.0)));
}

#[test]
fn gaussian_sectors() {
    let v = Potential::from_ints(&[0, 1]).unwrap();
    let s = sectors(&v).unwrap();
    assert_eq!(s.len(), 2);
    assert!(close(s[0].center_angle, 0.0) && close(s[1].center_angle, PI));
    assert!(close(s[0].half_width, PI / 4.0));
}

#[test]
fn sectors_alternate_and_tile() {
    // complex leading coefficient rotates the picture
    let v = Potential::polynomial(vec![cr_int(1), cr_int(0), cr_int(2), num_complex::Complex::new(cr_int(1).re, cr_int(1).re)]).unwrap();
    let w = Weight::new(&v).unwrap();
    let s = sectors_of(&w);
    assert_eq!(s.len(), 4);
    for i in 0..4 {
        let a = s[i].center_angle;
        let b = if i + 1 < 4 { s[i + 1].center_angle } else { s[0].center_angle + 2.0 * PI };
        // one forbidden sector of the same width between neighbours
        assert!(close(b - a, 4.0 * s[i].half_width));
        assert!(w.decays_along(a));
        assert!(!w.decays_along(0.5 * (a + b)));
    }
}

#[test]
fn gaussian_arc_is_real_line_direction() {
    let v = Potential::from_ints(&[0, 1]).unwrap();
    let arcs = basis_arcs(&v).unwrap();
    assert_eq!(arcs.len(), 1);
    assert_eq!(arcs[0].start, Endpoint::Infinity { angle: PI });
    assert_eq!(arcs[0].end, Endpoint::Infinity { angle: 0.0 });
}

#[test]
fn basis_counts() {
    for deg in 2..=6usize {
        let mut t = vec![cr_int(0); deg];
        t[deg - 1] = cr_int(1);
        t[0] = cr_ratio(1, 3);
        let v = Potential::polynomial(t).unwrap();
        assert_eq!(basis_arcs(&v).unwrap().len(), deg - 1);
    }
    let haar = Potential::rational(vec![cr_int(2)], vec![cr_int(0), cr_int(1)]).unwrap();
    let arcs = basis_arcs(&haar).unwrap();
    assert_eq!(arcs.len(), 1);
    assert_eq!(arcs[0], Contour::circle(Complex64::new(0.0, 0.0), 1.0));
}

#[test]
fn rational_with_zero_and_sectors() {
    // V' = x - 1/x: e^{-V} = x e^{-x^2/2}, zero at 0, two sectors
    let v = Potential::rational(vec![cr_int(-1), cr_int(0), cr_int(1)], vec![cr_int(0), cr_int(1)]).unwrap();
    let arcs = basis_arcs(&v).unwrap();
    assert_eq!(arcs.len(), 2);
    assert!(matches!(arcs[1].end, Endpoint::Pole { .. }));
    // V' = x + 1/x: pole of e^{-V}, one sector arc plus a circle
    let v = Potential::rational(vec![cr_int(1), cr_int(0), cr_int(1)], vec![cr_int(0), cr_int(1)]).unwrap();
    let arcs = basis_arcs(&v).unwrap();
    assert_eq!(arcs.len(), 2);
    assert!(arcs[1].is_closed());
}

#[test]
fn non_integer_residue_rejected() {
    let v = Potential::rational(vec![cr_ratio(1, 2)], vec![cr_int(0), cr_int(1)]).unwrap();
    match basis_arcs(&v) {
        Err(Error::Unsupported(m)) => assert!(m.contains("cut placement unsupported")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn double_pole_rejected() {
    let v = Potential::rational(vec![cr_int(1)], vec![cr_int(0), cr_int(0), cr_int(1)]).unwrap();
    assert!(matches!(basis_arcs(&v), Err(Error::Unsupported(_))));
}

#[test]
fn admissibility_examples() {
    let gauss = Potential::from_ints(&[0, 1]).unwrap();
    assert!(admissibility_check(&Contour::real_line(), &gauss, 10).unwrap().pass);

    let cubic = Potential::from_ints(&[0, 0, 1]).unwrap();
    let r = admissibility_check(&Contour::real_line(), &cubic, 10).unwrap();
    assert!(!r.pass);
    assert!(r.offending.unwrap()[0] < 0.0);

    let quartic = Potential::from_ints(&[0, 0, 0, 1]).unwrap();
    assert!(admissibility_check(&Contour::imaginary_line(), &quartic, 10).unwrap().pass);
    for a in basis_arcs(&quartic).unwrap() {
        assert!(admissibility_check(&a, &quartic, 12).unwrap().pass);
    }
}

#[test]
fn deformation_examples() {
    let gauss = Potential::from_ints(&[0, 1]).unwrap();
    let up = Deformation::Translate { by: Complex64::new(0.0, 0.3) };
    let c = deform(&Contour::real_line(), &up, &gauss).unwrap();
    assert!(admissibility_check(&c, &gauss, 8).unwrap().pass);
    let (x, _) = c.eval(1, 2.0);
    assert!(close(x.im, 0.3) && close(x.re, 2.0));

    let haar = Potential::rational(vec![cr_int(2)], vec![cr_int(0), cr_int(1)]).unwrap();
    let grow = Deformation::Scale { center: Complex64::new(0.0, 0.0), factor: 1.5 };
    let c = deform(&Contour::circle(Complex64::new(0.0, 0.0), 1.0), &grow, &haar).unwrap();
    assert!(close(c.eval(0, 0.0).0.re, 1.5));

    let turn = Deformation::Rotate { center: Complex64::new(0.0, 0.0), angle: 0.5 * PI };
    assert!(matches!(deform(&Contour::real_line(), &turn, &gauss), Err(Error::Deformation(_))));

    // shrinking a circle onto its pole
    let shrink = Deformation::Translate { by: Complex64::new(1.0, 0.0) };
    assert!(matches!(
        deform(&Contour::circle(Complex64::new(0.0, 0.0), 1.0), &shrink, &haar),
        Err(Error::Deformation(_))
    ));
}

#[test]
fn bump_tangent_matches_finite_difference() {
    let c = Contour::real_line().with_deformation(Deformation::Bump {
        center: Complex64::new(0.5, 0.1),
        width: 1.0,
        amplitude: Complex64::new(0.2, 0.4),
    });
    for s in [0.1, 0.7, 1.3] {
        let h = 1e-6;
        let (_, dx) = c.eval(1, s);
        let fd = (c.eval(1, s + h).0 - c.eval(1, s - h).0) / (2.0 * h);
        assert!((dx - fd).norm() < 1e-7);
    }
}

#[test]
fn power_class_expansion() {
    let v = Potential::from_ints(&[0, 0, 1]).unwrap();
    let arcs = basis_arcs(&v).unwrap();
    let g = HomologyClass::power(2, arcs.clone(), &[cr_int(2), cr_int(3)]).unwrap();
    let t: Vec<(Vec<usize>, crate::symcore::CRational)> = g.terms().map(|(a, b)| (a.clone(), b.clone())).collect();
    assert_eq!(t.len(), 3);
    assert!(t.contains(&(vec![2, 0], cr_int(4))));
    assert!(t.contains(&(vec![1, 1], cr_int(6))));
    assert!(t.contains(&(vec![0, 2], cr_int(9))));
    assert!(HomologyClass::basis(2, arcs, vec![1, 0]).is_err());
}
