use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

const HAAR: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];

// Extremal-phase Daubechies low-pass filters, normalized so the taps sum to sqrt(2).
const DB2: [f64; 4] = [
    0.48296291314453416,
    0.8365163037378079,
    0.2241438680420134,
    -0.12940952255126037,
];
const DB3: [f64; 6] = [
    0.33267055295008263,
    0.8068915093110925,
    0.45987750211849154,
    -0.13501102001025458,
    -0.08544127388202666,
    0.03522629188570953,
];
const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];
const DB5: [f64; 10] = [
    0.16010239797419293,
    0.6038292697971896,
    0.7243085284377729,
    0.13842814590132074,
    -0.24229488706638203,
    -0.032244869584638375,
    0.07757149384004572,
    -0.006241490212798274,
    -0.012580751999081999,
    0.0033357252854737712,
];
const DB6: [f64; 12] = [
    0.11154074335010947,
    0.49462389039845306,
    0.7511339080210954,
    0.31525035170919763,
    -0.22626469396543983,
    -0.12976686756726194,
    0.09750160558732304,
    0.027522865530305727,
    -0.03158203931748603,
    0.0005538422011614961,
    0.004777257510945511,
    -0.0010773010853084796,
];
const DB7: [f64; 14] = [
    0.07785205408500918,
    0.3965393194819173,
    0.7291320908462351,
    0.4697822874051931,
    -0.14390600392856498,
    -0.22403618499387498,
    0.07130921926683026,
    0.08061260915108308,
    -0.03802993693501441,
    -0.01657454163066688,
    0.01255099855609984,
    0.0004295779729213665,
    -0.0018016407040474908,
    0.00035371379997452024,
];
const DB8: [f64; 16] = [
    0.05441584224310401,
    0.31287159091429995,
    0.6756307362972898,
    0.5853546836542067,
    -0.015829105256349306,
    -0.2840155429615469,
    0.0004724845739132828,
    0.12874742662047847,
    -0.017369301001807547,
    -0.044088253930794755,
    0.013981027917398282,
    0.008746094047405777,
    -0.004870352993451574,
    -0.00039174037337694705,
    0.0006754494064505693,
    -0.00011747678412476953,
];

// Hölder exponents of the Daubechies scaling functions, orders 2..=8.
const DB_REGULARITY: [f64; 7] = [0.550, 1.088, 1.618, 1.969, 2.189, 2.460, 2.761];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Haar,
    PeriodizedDaubechies,
}

/// An orthonormal wavelet basis on [0,1], described by its low-pass filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    family: Family,
    order: usize,
    regularity: f64,
    filter: &'static [f64],
}

impl Basis {
    pub fn haar() -> Self {
        Self {
            family: Family::Haar,
            order: 1,
            regularity: 0.0,
            filter: &HAAR,
        }
    }

    /// Periodized Daubechies basis with `order` vanishing moments (2..=8).
    pub fn daubechies(order: usize) -> Result<Self> {
        let filter: &'static [f64] = match order {
            2 => &DB2,
            3 => &DB3,
            4 => &DB4,
            5 => &DB5,
            6 => &DB6,
            7 => &DB7,
            8 => &DB8,
            _ => return invalid(format!("Daubechies order must be in 2..=8, got {order}")),
        };
        Ok(Self {
            family: Family::PeriodizedDaubechies,
            order,
            regularity: DB_REGULARITY[order - 2],
            filter,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of vanishing moments.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Hölder regularity `S` of the scaling function (0 for Haar).
    pub fn regularity(&self) -> f64 {
        self.regularity
    }

    pub fn filter(&self) -> &'static [f64] {
        self.filter
    }

    /// Largest smoothness index the basis can represent: `S` for Daubechies,
    /// and the approximation order 1 for Haar.
    pub fn smoothness_ceiling(&self) -> f64 {
        match self.family {
            Family::Haar => 1.0,
            Family::PeriodizedDaubechies => self.regularity,
        }
    }

    /// Coarsest level used when none is given: 0 for Haar, the smallest `j`
    /// with `2^j >= 2N` for Daubechies.
    pub fn default_coarse_level(&self) -> u32 {
        match self.family {
            Family::Haar => 0,
            Family::PeriodizedDaubechies => (2 * self.order).next_power_of_two().trailing_zeros(),
        }
    }

    /// Quadrature-mirror high-pass filter `g[n] = (-1)^n h[L-1-n]`.
    pub fn high_pass(&self) -> Vec<f64> {
        let len = self.filter.len();
        (0..len)
            .map(|n| {
                let h = self.filter[len - 1 - n];
                if n % 2 == 0 {
                    h
                } else {
                    -h
                }
            })
            .collect()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Haar => write!(f, "haar"),
            Family::PeriodizedDaubechies => write!(f, "db{}", self.order),
        }
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "haar" || s == "db1" {
            return Ok(Self::haar());
        }
        match s.strip_prefix("db").map(str::parse::<usize>) {
            Some(Ok(order)) => Self::daubechies(order),
            _ => invalid(format!("unknown basis `{s}` (expected haar or db2..db8)")),
        }
    }
}
