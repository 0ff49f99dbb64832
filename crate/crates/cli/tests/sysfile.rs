use std::path::PathBuf;

use jetsym::analysis::{certify_nonobservability, OutputFunctional, SystemDefinition};
use jetsym::reduction::{BoundaryCondition, DomainSpec, SolvedPde};
use jetsym::symbolic::{parse, BundleSpec, Expr, JetCoordinate};
use jetsym_cli::sysfile::{equivalent, load, parse_system, LoadError};
use num_rational::BigRational;
use num_traits::{One, Zero};

fn shipped() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/olver-wave.sys")
}

fn p(s: &str) -> Expr {
    parse(s, &BundleSpec::scalar()).unwrap()
}

fn semantic_line(src: &str) -> (Option<usize>, String) {
    match parse_system(src) {
        Err(LoadError::Semantic { line, message }) => (line, message),
        other => panic!("expected a semantic error, got {other:?}"),
    }
}

fn syntax_line(src: &str) -> usize {
    match parse_system(src) {
        Err(LoadError::Syntax { line, .. }) => line,
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

const HEADER: &str = "independent z t\ndependent x\ndomain 0 1\n";

#[test]
fn shipped_file_is_the_example_system() {
    let f = load(&shipped()).unwrap();
    let sys = &f.system;
    assert_eq!(sys.bundle, BundleSpec::scalar());
    assert_eq!(sys.domain, DomainSpec::new(BigRational::zero(), BigRational::one()).unwrap());
    assert_eq!(sys.pdes.len(), 1);
    assert_eq!(sys.pdes[0].principal, JetCoordinate::new(0, 0, 1));
    assert!(sys.pdes[0].rhs.equivalent(&p("(x+1)*x_z")));
    assert_eq!(sys.bcs.len(), 1);
    assert_eq!(sys.bcs[0].location, BigRational::one());
    assert!(sys.bcs[0].expr.equivalent(&p("x")));
    assert_eq!(sys.outputs[0].name, "y");
    assert!(sys.outputs[0].location.is_zero());
    assert!(sys.outputs[0].expr.equivalent(&p("x_z/x")));

    let v = f.field("v").unwrap();
    assert!(v.v_z.equivalent(&p("z*x")));
    assert!(v.v_t.equivalent(&p("0")));
    assert!(v.v_x[0].equivalent(&p("(x+1)*x")));
    let shift = f.field("shift").unwrap();
    assert!(shift.v_x[0].equivalent(&p("1")));
    assert!(f.profile("p0").unwrap()[0].equivalent(&p("1/2 - z/2")));
    assert_eq!(f.path.as_deref(), Some(shipped().as_path()));

    assert!(certify_nonobservability(sys, v).unwrap().overall.is_pass());
    assert!(!certify_nonobservability(sys, shift).unwrap().overall.is_pass());
}

#[test]
fn print_round_trips() {
    let f = load(&shipped()).unwrap();
    let again = parse_system(&f.to_text()).unwrap();
    assert!(equivalent(&f, &again));
    assert_eq!(again.to_text(), f.to_text());

    let src = "\
# two components, custom names, declarations after use
pde u_s = w*u_y - y
pde w_s = u_yy + 1/3
boundary y=-1/2 : u = w_y
boundary y=2 : w - 1 = 0
output m @ y=0.25 : u*w
output n @ y=2 : u_y / (1 + w^2)
field a : y d/dy + 1 d/du
field b : - s*u d/ds + (u + w) d/dw + 2 d/du
profile q : y^2 - 1/4, 1 + y/3
independent y s
dependent u w
domain -0.5 2
";
    let f = parse_system(src).unwrap();
    assert_eq!(f.system.bundle.dependent_names(), ["u", "w"]);
    let b = f.field("b").unwrap();
    assert!(b.v_t.equivalent(&parse("-s*u", &f.system.bundle).unwrap()));
    assert!(b.v_z.is_literal_zero());
    assert!(f.field("a").unwrap().v_x[1].is_literal_zero());
    let again = parse_system(&f.to_text()).unwrap();
    assert!(equivalent(&f, &again));
    assert!(!equivalent(&f, &load(&shipped()).unwrap()));
}

#[test]
fn boundary_away_from_the_endpoints_is_rejected() {
    let src = format!("{HEADER}pde x_t = x_z\nboundary z=0.5: x = 0\n");
    let (line, msg) = semantic_line(&src);
    assert_eq!(line, Some(5));
    assert!(msg.contains("not a domain endpoint"), "{msg}");
}

#[test]
fn empty_file_has_no_pde() {
    for src in ["", "# nothing here\n\n", HEADER] {
        let (line, msg) = semantic_line(src);
        assert_eq!(line, None);
        assert_eq!(msg, "no PDE declared");
    }
}

#[test]
fn principal_derivative_clash() {
    let src = format!("{HEADER}pde x_t = x_z\n\npde x_t = x\n");
    let (line, msg) = semantic_line(&src);
    assert_eq!(line, Some(6));
    assert!(msg.contains("line 4"), "{msg}");
}

#[test]
fn diagnostics_carry_line_numbers() {
    assert_eq!(syntax_line(&format!("{HEADER}pde x_t = (x+1*x_z\n")), 4);
    assert_eq!(syntax_line(&format!("{HEADER}pde x_t = x_z\nbogus 1 2\n")), 5);
    assert_eq!(syntax_line(&format!("{HEADER}pde x_t = x_z\nfield v : x d/dz 3\n")), 5);
    assert_eq!(syntax_line("dependent x\ndomain 0 one\npde x_t = x_z\n"), 2);

    // undeclared names
    let (line, msg) = semantic_line(&format!("{HEADER}pde x_t = w_z\n"));
    assert_eq!((line, msg.contains("`w_z`")), (Some(4), true));
    let (line, _) = semantic_line(&format!("{HEADER}pde x_t = x_z\nfield v : 1 d/dz + x d/dx\nprofile p : t\n"));
    assert_eq!(line, Some(6));
    let (line, _) = semantic_line(&format!("{HEADER}pde x_t = x_z\nprofile p : z, z\n"));
    assert_eq!(line, Some(5));
    let (line, _) = semantic_line(&format!("{HEADER}pde x = x_z\n"));
    assert_eq!(line, Some(4));
    let (line, _) = semantic_line(&format!("{HEADER}pde x_t = x_z\noutput y @ z=2 : x\n"));
    assert_eq!(line, Some(5));
    let (line, _) = semantic_line(&format!("{HEADER}pde x_t = x_z\nfield v : 1 d/dz\nfield v : 1 d/dt\n"));
    assert_eq!(line, Some(6));
    let (line, _) = semantic_line(&format!("{HEADER}domain 0 2\npde x_t = x_z\n"));
    assert_eq!(line, Some(4));
    let (line, _) = semantic_line(&format!("{HEADER}pde x_t = x_z\nboundary t=1 : x = 0\n"));
    assert_eq!(line, Some(5));

    let e = parse_system(&format!("{HEADER}pde x_t = (x+1*x_z\n")).unwrap_err();
    assert!(e.to_string().starts_with("line 4: "), "{e}");
}

#[test]
fn whole_file_problems_have_no_line() {
    let (line, msg) = semantic_line("domain 0 1\npde x_t = x_z\n");
    assert_eq!((line, msg.as_str()), (None, "no dependent variables declared"));
    let (line, msg) = semantic_line("dependent x\npde x_t = x_z\n");
    assert_eq!((line, msg.as_str()), (None, "no domain declared"));
    // x_t and x_z solved in terms of each other
    let (line, _) = semantic_line(&format!("{HEADER}pde x_t = x_z\npde x_z = x_t\n"));
    assert_eq!(line, None);
}

#[test]
fn missing_file_is_an_io_error() {
    let e = load(std::path::Path::new("/nonexistent/system.sys")).unwrap_err();
    assert!(matches!(e, LoadError::Io { .. }));
    assert_eq!(e.line(), None);
}

#[test]
fn loaded_system_matches_a_hand_built_one() {
    let f = load(&shipped()).unwrap();
    let built = SystemDefinition {
        bundle: BundleSpec::scalar(),
        domain: DomainSpec::new(BigRational::zero(), BigRational::one()).unwrap(),
        pdes: vec![SolvedPde::new(JetCoordinate::new(0, 0, 1), p("(x+1)*x_z"))],
        bcs: vec![BoundaryCondition::new(BigRational::one(), p("x"))],
        outputs: vec![OutputFunctional {
            name: "y".into(),
            expr: p("x_z/x"),
            location: BigRational::zero(),
        }],
    };
    let mut g = f.clone();
    g.system = built;
    assert!(equivalent(&f, &g));
}
