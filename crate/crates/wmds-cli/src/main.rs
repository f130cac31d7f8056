//! Command-line front end: root-datum inspection, symbolic p-part
//! computation, glued coefficients, truncated series, and the verification
//! suites. Output is deterministic for fixed flags and seed; machine
//! formats are JSON (canonical) and TSV.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::process::ExitCode;
use wmds::cartan::CartanType;
use wmds::cg;
use wmds::glue::{LambdaClassVector, SeriesContext};
use wmds::scattering;
use wmds::{FqPoly, GaussScalar, GroupAlgebra, Localized, Metaplectic, Place, TupleC};

#[derive(Parser)]
#[command(
    name = "wmds",
    about = "Weyl group multiple Dirichlet series over F_q(t): p-parts, gluing, verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Json,
    Tsv,
}

#[derive(Args, Clone)]
struct DatumArgs {
    /// Cartan type, e.g. A2, C2, G2 (or a bare family letter with --rank).
    #[arg(long = "type", value_name = "TYPE")]
    cartan_type: String,
    /// Rank, when not part of --type.
    #[arg(long)]
    rank: Option<usize>,
    /// Cover degree n.
    #[arg(long, default_value_t = 1)]
    n: i64,
}

impl DatumArgs {
    fn parse_type(&self) -> Result<CartanType, String> {
        let label = match self.rank {
            Some(r) if !self.cartan_type.chars().any(|c| c.is_ascii_digit()) => {
                format!("{}{}", self.cartan_type, r)
            }
            _ => self.cartan_type.clone(),
        };
        label.parse::<CartanType>().map_err(|e| e.to_string())
    }
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// Field size q (prime).
    #[arg(long)]
    q: u64,
    /// Generator of F_q^× (default: least primitive root).
    #[arg(long)]
    generator: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the root datum and its metaplectic structure.
    Info {
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Compute the averaged element CS(λ∨) symbolically.
    Cs {
        #[command(flatten)]
        datum: DatumArgs,
        /// Dominant coweight, comma separated; default 0.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Print the coefficient table H(k₁,…,k_r) of CS(0).
    Hcoeffs {
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Glue a global coefficient H(C₁,…,C_r) from local tables.
    Glue {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        field: FieldArgs,
        /// Comma-separated monic polynomials, e.g. "t,t+1".
        #[arg(long)]
        tuple: String,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// The truncated series Σ H(C)·∏ x_i^{deg C_i} over deg C_i ≤ deg-max.
    Series {
        #[command(flatten)]
        datum: DatumArgs,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long = "deg-max", default_value_t = 1)]
        deg_max: usize,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
    },
    /// Run a verification suite; exits nonzero on failure.
    Verify {
        /// One of: all, braid, invariance, scattering, symbols, gauss,
        /// gluing, twisted, subsum, factorizable.
        suite: String,
        #[command(flatten)]
        datum: DatumArgs,
        /// Field size q (prime); required by the arithmetic suites.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        generator: Option<u64>,
        #[arg(long = "deg-max", default_value_t = 2)]
        deg_max: usize,
        /// Class vector for the subsum suite: "pi=k1,k2;pi2=..." .
        #[arg(long)]
        class: Option<String>,
        /// Sample count for randomized suites.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// RNG seed for randomized suites.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    // Die quietly when the output pipe closes (e.g. under `head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("WMDS_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

static PARITY_WARNING: std::sync::Once = std::sync::Once::new();

fn check_parity(meta: &Metaplectic, q: u64) {
    let n = meta.n() as u64;
    if (q - 1) % n != 0 {
        // Caught later by construction; nothing to warn about here.
        return;
    }
    if (q - 1) % (2 * n) != 0 {
        PARITY_WARNING.call_once(|| {
            eprintln!(
                "warning: 2n | q-1 fails (n = {n}, q = {q}); Gauss-sum norms and (π,π) = 1 \
                 are not guaranteed at odd-degree places"
            );
        });
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Info { datum, out } => {
            let ct = datum.parse_type()?;
            let meta = Metaplectic::new(ct, datum.n);
            cmd_info(&meta, out);
            Ok(ExitCode::SUCCESS)
        }
        Command::Cs { datum, lambda, out } => {
            let ct = datum.parse_type()?;
            let meta = Metaplectic::new(ct, datum.n);
            let lam: Vec<i64> = match lambda {
                None => vec![0; meta.rank()],
                Some(s) => parse_i64_list(&s, meta.rank())?,
            };
            let cs = cg::casselman_shalika(&meta, &lam).map_err(|e| e.to_string())?;
            match out {
                OutFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&element_json(&cs)).unwrap())
                }
                _ => println!("{cs}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Hcoeffs { datum, out } => {
            let ct = datum.parse_type()?;
            let meta = Metaplectic::new(ct, datum.n);
            let cs = cg::casselman_shalika(&meta, &vec![0; meta.rank()])
                .map_err(|e| e.to_string())?;
            let table = cg::h_coefficients(&cs);
            match out {
                OutFormat::Json => {
                    let rows: Vec<_> = table
                        .entries()
                        .map(|(k, h)| json!({"k": k, "H": h.to_string()}))
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&rows).unwrap());
                }
                OutFormat::Tsv => {
                    println!("k\tH");
                    for (k, h) in table.entries() {
                        let ks: Vec<String> = k.iter().map(|x| x.to_string()).collect();
                        println!("{}\t{}", ks.join(","), h);
                    }
                }
                OutFormat::Text => {
                    for (k, h) in table.entries() {
                        println!("H{k:?} = {h}");
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Glue { datum, field, tuple, out } => {
            let ct = datum.parse_type()?;
            let meta = Metaplectic::new(ct, datum.n);
            check_parity(&meta, field.q);
            let comps = parse_tuple(&tuple, field.q, meta.rank())?;
            let max_deg = comps.iter().map(|c| c.degree()).max().unwrap_or(1).max(1);
            let ctx = SeriesContext::new(meta, field.q, field.generator, max_deg)
                .map_err(|e| e.to_string())?;
            let c = TupleC::new(comps);
            let glued = ctx.glue_h(&c).map_err(|e| e.to_string())?;
            match out {
                OutFormat::Json => {
                    let tuple_strs: Vec<String> =
                        c.components().iter().map(|p| p.to_string()).collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "tuple": tuple_strs,
                            "H": {"re": glued.value.re, "im": glued.value.im},
                            "D": glued.d.0,
                        }))
                        .unwrap()
                    );
                }
                _ => {
                    println!("H{c} = {}", fmt_c(glued.value));
                    println!("D index = {}", glued.d.0);
                    for (pi, k, v) in &glued.locals {
                        println!("  at ({pi}): k = {k:?}, H_local = {}", fmt_c(*v));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Series { datum, field, deg_max, out } => {
            let ct = datum.parse_type()?;
            let meta = Metaplectic::new(ct, datum.n);
            check_parity(&meta, field.q);
            let ctx = SeriesContext::new(meta, field.q, field.generator, deg_max.max(1))
                .map_err(|e| e.to_string())?;
            let z = ctx.z_truncated(deg_max).map_err(|e| e.to_string())?;
            match out {
                OutFormat::Json => {
                    let rows: Vec<_> = z
                        .terms()
                        .map(|(e, c)| json!({"monomial": e, "coeff": {"re": c.re, "im": c.im}}))
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&rows).unwrap());
                }
                OutFormat::Tsv => {
                    println!("monomial\tre\tim");
                    for (e, c) in z.terms() {
                        let es: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                        println!("{}\t{}\t{}", es.join(","), c.re, c.im);
                    }
                }
                OutFormat::Text => {
                    for (e, c) in z.terms() {
                        println!("x^{e:?}: {}", fmt_c(*c));
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, datum, q, generator, deg_max, class, samples, seed } => {
            let ct = datum.parse_type()?;
            let meta = Metaplectic::new(ct, datum.n);
            let mut runner = SuiteRunner {
                meta,
                q,
                generator,
                deg_max,
                class,
                samples,
                seed,
                failures: 0,
            };
            let known = [
                "braid",
                "invariance",
                "scattering",
                "symbols",
                "gauss",
                "gluing",
                "twisted",
                "subsum",
                "factorizable",
            ];
            match suite.as_str() {
                "all" => {
                    for s in known {
                        runner.dispatch(s)?;
                    }
                }
                s if known.contains(&s) => runner.dispatch(s)?,
                other => return Err(format!("unknown suite: {other}")),
            }
            if runner.failures == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

struct SuiteRunner {
    meta: Metaplectic,
    q: Option<u64>,
    generator: Option<u64>,
    deg_max: usize,
    class: Option<String>,
    samples: usize,
    seed: u64,
    failures: usize,
}

impl SuiteRunner {
    fn report(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("[pass] {name}: {detail}");
        } else {
            println!("[FAIL] {name}: {detail}");
            self.failures += 1;
        }
    }

    fn series_context(&self) -> Result<SeriesContext, String> {
        let q = self.q.ok_or("this suite requires --q")?;
        check_parity(&self.meta, q);
        SeriesContext::new(self.meta.clone(), q, self.generator, self.deg_max.max(2))
            .map_err(|e| e.to_string())
    }

    fn symbol_context(&self) -> Result<wmds::SymbolContext, String> {
        let q = self.q.ok_or("this suite requires --q")?;
        check_parity(&self.meta, q);
        wmds::SymbolContext::new(q, self.meta.n() as u64, self.generator).map_err(|e| e.to_string())
    }

    fn dispatch(&mut self, suite: &str) -> Result<(), String> {
        match suite {
            "braid" => self.braid(),
            "invariance" => self.invariance(),
            "scattering" => self.scattering(),
            "symbols" => self.symbols(),
            "gauss" => self.gauss(),
            "gluing" => self.gluing(),
            "twisted" => self.twisted(),
            "subsum" => self.subsum(),
            "factorizable" => self.factorizable(),
            _ => unreachable!(),
        }
        Ok(())
    }

    fn braid(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let r = self.meta.rank();
        let mut ok = true;
        let mut tested = 0usize;
        // Involutions s_i ⋆ s_i ⋆ x = x.
        for i in 0..r {
            for _ in 0..self.samples {
                let lam: Vec<i64> = (0..r).map(|_| rng.gen_range(-3..=3)).collect();
                let x = Localized::from_poly(GroupAlgebra::monomial(
                    lam,
                    GaussScalar::one_scalar(),
                ));
                let twice = cg::cg_simple(&self.meta, i, &cg::cg_simple(&self.meta, i, &x));
                tested += 1;
                if !twice.eq_exact(&x) {
                    ok = false;
                }
            }
        }
        // Rank-2 braid words within every pair of simple reflections.
        for i in 0..r {
            for j in i + 1..r {
                let a = self.meta.datum().cartan(i, j);
                let b = self.meta.datum().cartan(j, i);
                let order = match a * b {
                    0 => 2,
                    1 => 3,
                    2 => 4,
                    3 => 6,
                    _ => continue,
                };
                let w1: Vec<usize> = (0..order).map(|k| if k % 2 == 0 { i } else { j }).collect();
                let w2: Vec<usize> = (0..order).map(|k| if k % 2 == 0 { j } else { i }).collect();
                for _ in 0..self.samples {
                    let lam: Vec<i64> = (0..r).map(|_| rng.gen_range(-3..=3)).collect();
                    let x = Localized::from_poly(GroupAlgebra::monomial(
                        lam,
                        GaussScalar::one_scalar(),
                    ));
                    let lhs = cg::cg_act(&self.meta, &w1, &x);
                    let rhs = cg::cg_act(&self.meta, &w2, &x);
                    tested += 1;
                    if !lhs.eq_exact(&rhs) {
                        ok = false;
                    }
                }
            }
        }
        self.report("braid", ok, format!("{tested} involution/braid comparisons, exact"));
    }

    fn invariance(&mut self) {
        match cg::casselman_shalika(&self.meta, &vec![0; self.meta.rank()]) {
            Ok(cs) => match cg::verify_cs_invariance(&self.meta, &cs) {
                Ok(()) => self.report(
                    "invariance",
                    true,
                    format!("CS(0) with {} terms is invariant", cs.num_terms()),
                ),
                Err(e) => self.report("invariance", false, e.to_string()),
            },
            Err(e) => self.report("invariance", false, e.to_string()),
        }
    }

    fn scattering(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let r = self.meta.rank();
        let samples: Vec<(usize, Vec<i64>)> = (0..self.samples)
            .map(|_| {
                (
                    rng.gen_range(0..r),
                    (0..r).map(|_| rng.gen_range(-5..=5)).collect(),
                )
            })
            .collect();
        match scattering::verify_scattering(&self.meta, &samples) {
            Ok(()) => self.report(
                "scattering",
                true,
                format!("{} samples, exact", samples.len()),
            ),
            Err(e) => self.report("scattering", false, e.to_string()),
        }
    }

    fn symbols(&mut self) {
        let sym = match self.symbol_context() {
            Ok(c) => c,
            Err(e) => {
                self.report("symbols", false, e);
                return;
            }
        };
        let sym = &sym;
        let q = sym.q();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut ok = true;
        let places = sym.finite_places(2);
        let random_monic = |rng: &mut ChaCha8Rng, max_deg: usize| {
            let d = rng.gen_range(0..=max_deg);
            let mut coeffs: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
            coeffs.push(1);
            FqPoly::new(q, coeffs)
        };
        // Unit pairs, and uniformizer pairs when 2n | q_ν−1 guarantees them.
        for place in places.iter().take(6) {
            let pi = match place {
                Place::Finite(pi) => pi,
                _ => unreachable!(),
            };
            let parity = (place.q_nu(q) - 1) % (2 * sym.n()) == 0;
            if parity && sym.hilbert(pi, pi, place).unwrap() != wmds::MuElem::ONE {
                ok = false;
            }
            for _ in 0..5 {
                let u = random_monic(&mut rng, 2);
                let w = random_monic(&mut rng, 2);
                if u.rem(pi).is_zero() || w.rem(pi).is_zero() {
                    continue;
                }
                if sym.hilbert(&u, &w, place).unwrap() != wmds::MuElem::ONE {
                    ok = false;
                }
            }
        }
        // Bimultiplicativity and antisymmetry.
        for _ in 0..100 {
            let place = &places[rng.gen_range(0..places.len())];
            let a = random_monic(&mut rng, 2);
            let ap = random_monic(&mut rng, 2);
            let b = random_monic(&mut rng, 2);
            let lhs = sym.hilbert(&a.mul(&ap), &b, place).unwrap();
            let rhs = sym.emb.mu_mul(
                sym.hilbert(&a, &b, place).unwrap(),
                sym.hilbert(&ap, &b, place).unwrap(),
            );
            if lhs != rhs {
                ok = false;
            }
            let xy = sym.hilbert(&a, &b, place).unwrap();
            let yx = sym.hilbert(&b, &a, place).unwrap();
            if sym.emb.mu_mul(xy, yx) != wmds::MuElem::ONE {
                ok = false;
            }
        }
        // Reciprocity over all places.
        for _ in 0..100 {
            let x = random_monic(&mut rng, 4);
            let y = random_monic(&mut rng, 4);
            let mut acc = sym.hilbert_s(&x, &y).unwrap();
            let mut support: std::collections::BTreeSet<FqPoly> =
                wmds::factorize(&x).1.into_iter().map(|(pi, _)| pi).collect();
            support.extend(wmds::factorize(&y).1.into_iter().map(|(pi, _)| pi));
            for pi in support {
                acc = sym
                    .emb
                    .mu_mul(acc, sym.hilbert(&x, &y, &Place::Finite(pi)).unwrap());
            }
            if acc != wmds::MuElem::ONE {
                ok = false;
            }
        }
        self.report("symbols", ok, "units, (π,π), bimultiplicativity, antisymmetry, reciprocity".into());
    }

    fn gauss(&mut self) {
        let sym = match self.symbol_context() {
            Ok(c) => c,
            Err(e) => {
                self.report("gauss", false, e);
                return;
            }
        };
        let n = sym.n() as usize;
        let q = sym.q();
        let mut ok = true;
        let mut detail = Vec::new();
        for d in 1..=2usize {
            let pi = wmds::irreducibles(q, d)[0].clone();
            let place = Place::Finite(pi);
            let q_nu = place.q_nu(q) as f64;
            let table = sym.gauss_table(&place);
            if (table[0] - Complex64::new(-1.0, 0.0)).norm() > 1e-12 {
                ok = false;
                detail.push(format!("g_0 != -1 at degree {d}"));
            }
            if sym.emb.has_strict_parity() {
                for k in 1..n {
                    let prod = table[k] * table[n - k];
                    if (prod - Complex64::new(q_nu, 0.0)).norm() / q_nu > 1e-9 {
                        ok = false;
                        detail.push(format!("g_k g_-k != q at degree {d}, k = {k}"));
                    }
                }
            }
            for k in 0..n as i64 {
                let a = sym.gauss_sum(k, &place);
                let b = sym.gauss_sum(k + n as i64, &place);
                if (a - b).norm() > 1e-12 {
                    ok = false;
                    detail.push(format!("periodicity fails at degree {d}, k = {k}"));
                }
            }
        }
        let msg = if detail.is_empty() {
            "g_0, norms, periodicity at degrees 1 and 2".to_string()
        } else {
            detail.join("; ")
        };
        self.report("gauss", ok, msg);
    }

    fn gluing(&mut self) {
        let ctx = match self.series_context() {
            Ok(c) => c,
            Err(e) => {
                self.report("gluing", false, e);
                return;
            }
        };
        let r = ctx.rank();
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=self.deg_max.min(2) {
            polys.extend(wmds::monic_polys(ctx.q(), d));
        }
        let mut ok = true;
        let mut count = 0usize;
        let mut indices = vec![0usize; r];
        'outer: loop {
            let comps: Vec<FqPoly> = indices.iter().map(|&i| polys[i].clone()).collect();
            let c = TupleC::new(comps);
            count += 1;
            if ctx.d_global(&c).unwrap() != ctx.d_global_direct(&c).unwrap() {
                ok = false;
            }
            let support: Vec<FqPoly> = c.support().cloned().collect();
            for pi in &support {
                if ctx.d_local(&c, pi).unwrap() != ctx.d_local_expanded(&c, pi).unwrap() {
                    ok = false;
                }
            }
            let mut i = 0;
            loop {
                if i == r {
                    break 'outer;
                }
                indices[i] += 1;
                if indices[i] < polys.len() {
                    break;
                }
                indices[i] = 0;
                i += 1;
            }
        }
        self.report(
            "gluing",
            ok,
            format!("{count} tuples: D(C) and D(C;ν) agree along both routes"),
        );
    }

    fn twisted(&mut self) {
        let ctx = match self.series_context() {
            Ok(c) => c,
            Err(e) => {
                self.report("twisted", false, e);
                return;
            }
        };
        let r = ctx.rank();
        let q = ctx.q();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut ok = true;
        let mut checked = 0usize;
        while checked < self.samples.max(50) {
            let mk = |rng: &mut ChaCha8Rng| {
                let d = rng.gen_range(0..=1usize);
                let mut coeffs: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
                coeffs.push(1);
                FqPoly::new(q, coeffs)
            };
            let c = TupleC::new((0..r).map(|_| mk(&mut rng)).collect());
            let cp = TupleC::new((0..r).map(|_| mk(&mut rng)).collect());
            if !c.coprime_to(&cp) {
                continue;
            }
            checked += 1;
            let lhs = ctx.glue_h(&c.mul(&cp)).unwrap().value;
            let rhs = ctx.glue_h(&c).unwrap().value * ctx.glue_h(&cp).unwrap().value
                * ctx.twist_factor(&c, &cp).unwrap();
            if (lhs - rhs).norm() / lhs.norm().max(1.0) > 1e-6 {
                ok = false;
            }
        }
        self.report("twisted", ok, format!("{checked} coprime pairs within 1e-6"));
    }

    fn parse_class(&self, ctx: &SeriesContext) -> Result<LambdaClassVector, String> {
        match &self.class {
            None => Ok(LambdaClassVector::zero()),
            Some(s) => {
                let mut entries = Vec::new();
                for part in s.split(';') {
                    let (pi_s, ks) = part
                        .split_once('=')
                        .ok_or_else(|| format!("bad class entry: {part}"))?;
                    let pi = FqPoly::parse(pi_s, ctx.q()).map_err(|e| e.to_string())?;
                    let k = parse_i64_list(ks, ctx.rank())?;
                    entries.push((pi, k));
                }
                Ok(LambdaClassVector::from_entries(ctx.meta(), entries))
            }
        }
    }

    fn subsum(&mut self) {
        let ctx = match self.series_context() {
            Ok(c) => c,
            Err(e) => {
                self.report("subsum", false, e);
                return;
            }
        };
        let class = match self.parse_class(&ctx) {
            Ok(c) => c,
            Err(e) => {
                self.report("subsum", false, e);
                return;
            }
        };
        match ctx.verify_subsum_identity(&class, self.deg_max, 1e-6) {
            Ok(report) => {
                if report.adjoint_warning {
                    eprintln!(
                        "warning: metaplectic dual datum is not of adjoint type; \
                         the sub-sum identity is only asserted under that hypothesis"
                    );
                }
                self.report("subsum", report.ok, report.to_string());
            }
            Err(e) => self.report("subsum", false, e.to_string()),
        }
    }

    fn factorizable(&mut self) {
        let ctx = match self.series_context() {
            Ok(c) => c,
            Err(e) => {
                self.report("factorizable", false, e);
                return;
            }
        };
        let r = ctx.rank();
        let q = ctx.q();
        let from_tables = |pi: &FqPoly, log: &[i64]| -> Complex64 {
            let k: Vec<u32> = log.iter().map(|&x| x.max(0) as u32).collect();
            match ctx.local_table(pi.degree()) {
                Ok(t) => t.get(&k),
                Err(_) => Complex64::new(0.0, 0.0),
            }
        };
        let mut ok = true;
        // Reproduces glue_h on all tuples of degree ≤ 2.
        let mut polys: Vec<FqPoly> = Vec::new();
        for d in 0..=2usize.min(self.deg_max) {
            polys.extend(wmds::monic_polys(q, d));
        }
        let mut count = 0usize;
        let mut indices = vec![0usize; r];
        'outer: loop {
            let comps: Vec<FqPoly> = indices.iter().map(|&i| polys[i].clone()).collect();
            let c = TupleC::new(comps);
            count += 1;
            let hf = ctx.h_from_factorizable(from_tables, &c).unwrap();
            let glued = ctx.glue_h(&c).unwrap().value;
            if (hf - glued).norm() / glued.norm().max(1.0) > 1e-9 {
                ok = false;
            }
            let mut i = 0;
            loop {
                if i == r {
                    break 'outer;
                }
                indices[i] += 1;
                if indices[i] < polys.len() {
                    break;
                }
                indices[i] = 0;
                i += 1;
            }
        }
        // Twisted multiplicativity of the factorizable function.
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut checked = 0usize;
        while checked < self.samples.max(50) {
            let mk = |rng: &mut ChaCha8Rng| {
                let d = rng.gen_range(0..=1usize);
                let mut coeffs: Vec<u64> = (0..d).map(|_| rng.gen_range(0..q)).collect();
                coeffs.push(1);
                FqPoly::new(q, coeffs)
            };
            let c = TupleC::new((0..r).map(|_| mk(&mut rng)).collect());
            let cp = TupleC::new((0..r).map(|_| mk(&mut rng)).collect());
            if !c.coprime_to(&cp) {
                continue;
            }
            checked += 1;
            let lhs = ctx.h_from_factorizable(from_tables, &c.mul(&cp)).unwrap();
            let rhs = ctx.h_from_factorizable(from_tables, &c).unwrap()
                * ctx.h_from_factorizable(from_tables, &cp).unwrap()
                * ctx.twist_factor(&c, &cp).unwrap();
            if (lhs - rhs).norm() / lhs.norm().max(1.0) > 1e-6 {
                ok = false;
            }
        }
        self.report(
            "factorizable",
            ok,
            format!("{count} tuples match glue_h; {checked} ratio checks"),
        );
    }
}

fn cmd_info(meta: &Metaplectic, out: OutFormat) {
    let d = meta.datum();
    let r = meta.rank();
    match out {
        OutFormat::Json => {
            let cartan: Vec<Vec<i64>> = (0..r)
                .map(|i| (0..r).map(|j| d.cartan(i, j)).collect())
                .collect();
            let gram: Vec<Vec<i64>> = (0..r)
                .map(|i| (0..r).map(|j| meta.b_simple(i, j)).collect())
                .collect();
            let obj = json!({
                "type": d.cartan_type().to_string(),
                "rank": r,
                "n": meta.n(),
                "cartan_matrix": cartan,
                "Q": (0..r).map(|i| meta.q_simple(i)).collect::<Vec<_>>(),
                "B": gram,
                "n_alpha": (0..r).map(|i| meta.n_simple(i)).collect::<Vec<_>>(),
                "positive_coroots": d.positive_coroots(),
                "weyl_order": d.weyl_order(),
                "lambda0_basis": meta.lambda0_basis(),
                "lambda0_index": meta.lambda0_index(),
                "dual_adjoint": meta.adjoint_dual(),
                "dual_cartan": meta.dual_cartan(),
            });
            println!("{}", serde_json::to_string_pretty(&obj).unwrap());
        }
        _ => {
            println!("type {} (rank {}), cover degree n = {}", d.cartan_type(), r, meta.n());
            println!("Q on simple coroots: {:?}", (0..r).map(|i| meta.q_simple(i)).collect::<Vec<_>>());
            println!("B Gram matrix:");
            for i in 0..r {
                println!("  {:?}", (0..r).map(|j| meta.b_simple(i, j)).collect::<Vec<_>>());
            }
            println!("n(α_i∨): {:?}", (0..r).map(|i| meta.n_simple(i)).collect::<Vec<_>>());
            println!("positive coroots ({}):", d.positive_coroots().len());
            for beta in d.positive_coroots() {
                println!("  {beta:?}  (Q = {}, n = {})", meta.q_form(beta), meta.n() / gcd(meta.n(), meta.q_form(beta)));
            }
            println!("|W| = {}", d.weyl_order());
            println!("Λ₀∨ basis:");
            for b in meta.lambda0_basis() {
                println!("  {b:?}");
            }
            println!("[Λ∨ : Λ₀∨] = {}", meta.lambda0_index());
            println!("dual datum adjoint: {}", meta.adjoint_dual());
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn parse_i64_list(s: &str, expect: usize) -> Result<Vec<i64>, String> {
    let v: Result<Vec<i64>, _> = s.split(',').map(|x| x.trim().parse::<i64>()).collect();
    let v = v.map_err(|e| format!("bad integer list '{s}': {e}"))?;
    if v.len() != expect {
        return Err(format!("expected {expect} entries, got {}", v.len()));
    }
    Ok(v)
}

fn parse_tuple(s: &str, q: u64, expect: usize) -> Result<Vec<FqPoly>, String> {
    let comps: Result<Vec<FqPoly>, _> = s.split(',').map(|p| FqPoly::parse(p, q)).collect();
    let comps = comps.map_err(|e| e.to_string())?;
    if comps.len() != expect {
        return Err(format!("expected {expect} polynomials, got {}", comps.len()));
    }
    for c in &comps {
        if c.is_zero() || !c.is_monic() {
            return Err(format!("tuple entries must be monic and nonzero, got {c}"));
        }
    }
    Ok(comps)
}

fn fmt_c(c: Complex64) -> String {
    format!("{:.9}{:+.9}i", c.re, c.im)
}

fn element_json(x: &wmds::GenericElement) -> serde_json::Value {
    let mut rows = Vec::new();
    for (exp, c) in x.terms() {
        for (v, g, coeff) in c.terms() {
            let gmap: serde_json::Map<String, serde_json::Value> = g
                .iter()
                .map(|(k, e)| (k.to_string(), json!(e)))
                .collect();
            rows.push(json!({
                "lambda": exp,
                "v": v,
                "g": gmap,
                "coeff": coeff.to_string(),
            }));
        }
    }
    serde_json::Value::Array(rows)
}
