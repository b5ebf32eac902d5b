use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Zero/pole/gain transfer function `gain·Π(s − z_i)/Π(s − p_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTF {
    pub gain: f64,
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
}

impl RationalTF {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let num: Complex64 = self.zeros.iter().map(|z| s - z).product();
        let den: Complex64 = self.poles.iter().map(|p| s - p).product();
        self.gain * num / den
    }

    /// Value at `s = jω`.
    pub fn response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
    }

    pub fn is_stable(&self) -> bool {
        self.poles.iter().all(|p| p.re < 0.0)
    }

    pub fn is_minimum_phase(&self) -> bool {
        self.zeros.iter().all(|z| z.re < 0.0)
    }
}
