use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A point or point set does not have the expected ambient dimension.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// Two sequences that must be paired have different lengths.
    LengthMismatch {
        left: usize,
        right: usize,
    },
    /// A coordinate fell outside `[0, 1]`.
    CoordinateOutOfRange {
        index: usize,
        value: f64,
    },
    NegativeRange {
        index: usize,
        value: f64,
    },
    RangeAboveCap {
        index: usize,
        value: f64,
        cap: f64,
    },
    InvalidDensity(&'static str),
    /// A scalar argument is outside its admissible domain.
    InvalidParameter {
        name: &'static str,
        value: f64,
    },
    /// The operation is only defined for one-dimensional instances.
    NotOneDimensional {
        dimension: usize,
    },
    /// The supplied matching is not a valid matching of the graph.
    InvalidMatching,
    /// The supplied matching admits an augmenting path.
    NotMaximum,
    Unsorted,
    NotMajorized,
    InvalidTau {
        tau: f64,
        gap: f64,
    },
    /// The chain entered a region whose move needs an `Exp(0)` draw.
    DegenerateFlexibility {
        p: f64,
        region: char,
    },
    /// A matched-fraction ratio has a vanishing denominator.
    ZeroDenominator(&'static str),
    Unclassifiable {
        x: f64,
        y: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::CoordinateOutOfRange { index, value } => {
                write!(f, "coordinate {index} = {value} lies outside [0, 1]")
            }
            Error::NegativeRange { index, value } => {
                write!(f, "service range {index} is negative ({value})")
            }
            Error::RangeAboveCap { index, value, cap } => {
                write!(f, "service range {index} = {value} exceeds the cap {cap}")
            }
            Error::InvalidDensity(why) => write!(f, "invalid density: {why}"),
            Error::InvalidParameter { name, value } => {
                write!(f, "parameter `{name}` has inadmissible value {value}")
            }
            Error::NotOneDimensional { dimension } => {
                write!(f, "operation requires k = 1, got k = {dimension}")
            }
            Error::InvalidMatching => f.write_str("pairs do not form a matching of the graph"),
            Error::NotMaximum => f.write_str("matching is not maximum: an augmenting path exists"),
            Error::Unsorted => f.write_str("input must be sorted in nondecreasing order"),
            Error::NotMajorized => f.write_str("first vector does not majorize the second"),
            Error::InvalidTau { tau, gap } => {
                write!(f, "transfer {tau} is outside (0, {gap}]")
            }
            Error::DegenerateFlexibility { p, region } => {
                write!(f, "region {region} needs an exponential draw with rate zero (p = {p})")
            }
            Error::ZeroDenominator(what) => {
                write!(f, "stationary mass of {what} vanishes; ratio undefined")
            }
            Error::Unclassifiable { x, y } => {
                write!(f, "state ({x}, {y}) matches no region")
            }
        }
    }
}

impl core::error::Error for Error {}
