//! The named operations a `[check OP]` section can run.

macro_rules! check_ops {
    ($($variant:ident => $name:literal, $tol:expr, $anchor:literal;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum CheckOp {
            $($variant,)*
        }

        impl CheckOp {
            pub const ALL: &'static [CheckOp] = &[$(CheckOp::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(CheckOp::$variant => $name,)*
                }
            }

            /// Short statement of the property the check exercises.
            pub fn anchor(self) -> &'static str {
                match self {
                    $(CheckOp::$variant => $anchor,)*
                }
            }

            pub fn default_tol(self) -> f64 {
                match self {
                    $(CheckOp::$variant => $tol,)*
                }
            }

            pub fn from_name(s: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|op| op.name() == s)
            }
        }
    };
}

check_ops! {
    DdZero => "dd_zero", 1e-9, "exterior derivative squares to zero";
    Frobenius => "frobenius", 1e-8, "Frobenius condition beta ^ d beta = 0";
    CoisotropyResiduals => "coisotropy_residuals", 1e-10, "foliation equations of a graph model";
    VerifyClaim => "verify_claim", 1e-10, "commuting isotropic frame V_k preserving lambda";
    ResidualAt => "residual_at", 1e-10, "single foliation equation at a point";
    OracleAgreement => "oracle_agreement", 1e-9, "foliation equations agree with pointwise linear algebra";
    SingularScan => "singular_scan", 1e-6, "singular locus dimension of the restricted form";
    Perturb => "perturb", 1e-10, "graphical perturbation clears a Legendrian singular piece";
    CharFoliation => "char_foliation", 1e-8, "characteristic foliation ker(lambda ^ (d lambda)^(k-n-1))";
    Flatness => "flatness", 1e-8, "flat connection: horizontal lifts commute (periodic box base)";
    Transport => "transport", 1e-6, "parallel transport along a base path";
    Holonomy => "holonomy", 1e-6, "holonomy of a base loop fixes 0 and preserves orientation";
    Ccl => "ccl", 1e-6, "CCL conditions: invariance, vanishing exactly at 0, d beta > 0";
    FlatStructure => "flat_structure", 1e-10, "ker d lambda flat structure and covariant constancy of lambda";
    Contactness => "contactness", 1e-8, "alpha ^ (d alpha)^n has constant sign and no zeros";
    VolumeIdentity => "volume_identity", 1e-10, "alpha ^ (d alpha)^n = n! f dvol for the tautological germ";
    ZeroSection => "zero_section", 1e-10, "germ restricts to the defining form on the zero section";
    Interpolation => "interpolation", 1e-8, "linear interpolation of co-oriented germs stays contact";
}
