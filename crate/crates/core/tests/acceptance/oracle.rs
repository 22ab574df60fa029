//! Independent reference implementations used to check the library.
#![allow(clippy::excessive_precision)]

/// `(100 e, h(e), 0.5 / h(e))` evaluated with 40-digit arithmetic.
pub const ENTROPY_TABLE: [(u32, f64, f64); 49] = [
    (1, 0.080793135895911172825, 6.188644548271634769),
    (2, 0.14144054254182064515, 3.5350543133851579222),
    (3, 0.19439185783157616087, 2.5721241906809030599),
    (4, 0.24229218908241476155, 2.0636240973906381773),
    (5, 0.28639695711595612877, 1.7458286045880036132),
    (6, 0.32744491915447619501, 1.5269743726398112442),
    (7, 0.36592365090022321528, 1.3664052563148904609),
    (8, 0.40217919020227285323, 1.2432269301366113489),
    (9, 0.43646981706410297935, 1.1455545846519933316),
    (10, 0.46899559358928122125, 1.0661080974630022128),
    (11, 0.49991595816452799564, 1.0001681119278139652),
    (12, 0.52936086528736436851, 0.94453525522438124104),
    (13, 0.557438185027989092, 0.89696044051035881532),
    (14, 0.58423881164285589326, 0.85581442046621352628),
    (15, 0.60984030471640042364, 0.81988677385388547208),
    (16, 0.63430955464056605307, 0.78825866068394148912),
    (17, 0.65770477874421944856, 0.76021950297315592972),
    (18, 0.68007704572827984202, 0.73521081639295851073),
    (19, 0.70147145988389742401, 0.71278737424720950199),
    (20, 0.72192809488736234787, 0.69258975172314312483),
    (21, 0.74148273993127372477, 0.67432452985533259106),
    (22, 0.76016750296196559273, 0.65774976969124280313),
    (23, 0.77801130354653768511, 0.64266418459573434275),
    (24, 0.79504027938452223691, 0.62889895388328415429),
    (25, 0.81127812445913286391, 0.61631145340365563381),
    (26, 0.82674637249261789546, 0.60478039775670688185),
    (27, 0.84146463620817561096, 0.59420203593238305517),
    (28, 0.85545081056013064436, 0.58448714271789729222),
    (29, 0.86872124633940451713, 0.57555861803413612514),
    (30, 0.88129089923069261822, 0.56734955556271623949),
    (31, 0.89317345837785673392, 0.55980167716590965539),
    (32, 0.90438145772449389813, 0.55286405501727725676),
    (33, 0.91492637277972753125, 0.54649206195783926281),
    (34, 0.92481870497303002808, 0.54064650434874283932),
    (35, 0.93406805537549100601, 0.53529290197061961372),
    (36, 0.94268318925549224509, 0.53040088727463950406),
    (37, 0.95067209268706590013, 0.52594370219362873317),
    (38, 0.95804202222629957864, 0.52189777525426202377),
    (39, 0.96479954850508721377, 0.51824236524024823412),
    (40, 0.970950594454668639, 0.51495926039452443441),
    (41, 0.97650046875782403885, 0.5120325243018413427),
    (42, 0.98145389503365354439, 0.50944828129991298231),
    (43, 0.98581503717891982713, 0.50719453563098048114),
    (44, 0.98958752122205560285, 0.50526101964436954504),
    (45, 0.99277445398780829365, 0.50363906725398095267),
    (46, 0.99537843882022576053, 0.50232150958847971124),
    (47, 0.9974015885677395658, 0.50130259038187002065),
    (48, 0.99884553599520180524, 0.50057789916618486069),
    (49, 0.9997114417528099197, 0.50014432076854304406),
];

/// Row-major 0/1 matrix.
pub struct Dense {
    pub rows: Vec<Vec<u8>>,
}

impl Dense {
    pub fn mul(&self, x: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(x).fold(0u8, |acc, (&a, &b)| acc ^ (a & b)))
            .collect()
    }
}

/// Plain flooding sum-product on a single parity-check matrix given as
/// lists of variable indices per check.
pub struct Textbook {
    n: usize,
    checks: Vec<Vec<usize>>,
    /// For each variable, `(check, position in that check's list)`.
    var_edges: Vec<Vec<(usize, usize)>>,
}

impl Textbook {
    pub fn new(n: usize, checks: Vec<Vec<usize>>) -> Self {
        let mut var_edges = vec![Vec::new(); n];
        for (j, vars) in checks.iter().enumerate() {
            for (p, &v) in vars.iter().enumerate() {
                var_edges[v].push((j, p));
            }
        }
        Textbook { n, checks, var_edges }
    }

    fn satisfied(&self, word: &[u8], z: &[u8]) -> bool {
        self.checks
            .iter()
            .zip(z)
            .all(|(vars, &s)| vars.iter().fold(0u8, |a, &v| a ^ word[v]) == s)
    }

    /// Hard decisions before the first iteration and after each one,
    /// stopping at the first word that satisfies every check.
    pub fn trace(&self, y: &[u8], z: &[u8], e: f64, max_iterations: usize, clamp: f64) -> Vec<Vec<u8>> {
        let l0 = ((1.0 - e) / e).ln();
        let prior: Vec<f64> = y.iter().map(|&b| if b == 0 { l0 } else { -l0 }).collect();
        let mut q: Vec<Vec<f64>> = self
            .checks
            .iter()
            .map(|vars| vars.iter().map(|&v| prior[v].clamp(-clamp, clamp)).collect())
            .collect();
        let mut r: Vec<Vec<f64>> = self.checks.iter().map(|vars| vec![0.0; vars.len()]).collect();
        let mut out = vec![y.to_vec()];
        if self.satisfied(y, z) {
            return out;
        }
        for _ in 0..max_iterations {
            for (j, vars) in self.checks.iter().enumerate() {
                let sign = if z[j] == 1 { -1.0 } else { 1.0 };
                for i in 0..vars.len() {
                    let mut prod = 1.0;
                    for k in 0..vars.len() {
                        if k != i {
                            prod *= (q[j][k] / 2.0).tanh();
                        }
                    }
                    r[j][i] = (sign * 2.0 * prod.atanh()).clamp(-clamp, clamp);
                }
            }
            let mut post = prior.clone();
            for v in 0..self.n {
                for &(j, p) in &self.var_edges[v] {
                    post[v] += r[j][p];
                }
            }
            let hard: Vec<u8> = post.iter().map(|&x| (x < 0.0) as u8).collect();
            let done = self.satisfied(&hard, z);
            out.push(hard);
            if done {
                break;
            }
            for v in 0..self.n {
                for &(j, p) in &self.var_edges[v] {
                    q[j][p] = (post[v] - r[j][p]).clamp(-clamp, clamp);
                }
            }
        }
        out
    }
}
