use chemosteady_core::error::Error as CoreError;

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Solver(e) => e,
        }
    }
}

pub trait Classify<T> {
    /// Errors while reading or interpreting the configuration.
    fn config(self) -> Result<T, Failure>;
    /// Errors during the computation; invalid inputs rejected by the
    /// library still count as configuration errors.
    fn solver(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn solver(self) -> Result<T, Failure> {
        self.map_err(|e| {
            let e = e.into();
            match e.downcast_ref::<CoreError>() {
                Some(CoreError::Config(_)) => Failure::Config(e),
                _ => Failure::Solver(e),
            }
        })
    }
}
