import hashlib
import math

STRUCTURE_TOLERANCE = 1e-10
CLASSIFY_TOLERANCE = 1e-12
DEFAULT_TOL_ABS = 1e-8
DEFAULT_TOL_REL = 1e-6
DEFAULT_POINTS = 100
DEFAULT_SEED = 0
FD_STEP = 1e-4
FD_REL_TOLERANCE = 1e-5
# second differences lose about two digits against first ones at the same step
FD_SECOND_ORDER_TOLERANCE = 1e-4
PERTURBATION_AMPLITUDE = 0.05
# roots of t^2 + 6t - 3, where the W2+W3+W4 sign region ends
T_ROOT_LOW = -3 - 2 * math.sqrt(3)
T_ROOT_HIGH = -3 + 2 * math.sqrt(3)
DEFAULT_T_VALUES = (T_ROOT_LOW, -1.0, -0.5, 0.0, 1 / 3, T_ROOT_HIGH, 0.5, 1.0, 2.0)
# integral comparisons allow this many estimated standard errors
QUADRATURE_SIGMAS = 3.0

CONVENTION_LEDGER: tuple[str, ...] = (
    "F(X,Y) = h(JX,Y); dv = F^n/n!; Hodge star oriented by dv",
    "wedge uses the determinant convention; |phi|^2 sums strictly increasing multi-indices",
    "TM-valued forms: full sum over the vector index, increasing sum over form indices",
    "|nabla F|^2 = 1/2 sum_{A,B,C} (nabla_A F)_{BC}^2",
    "N(X,Y) = [X,Y] + J[JX,Y] + J[X,JY] - [JX,JY]; N(X,Y,Z) = h(X, N(Y,Z))",
    "bN(X,Y,Z) = 1/3 cyclic sum of N; N0 = N - bN",
    "dF = (dF)_0 + alpha ^ F / (n-1); alpha_C = 1/2 sum F_AB dF_ABC = J delta F",
    "delta = -*d*; on 1-forms delta alpha = -div(alpha)",
    "J on k-forms: (J phi)(X1..Xk) = (-1)^k phi(JX1,..,JXk)",
    "R(X,Y,Z,W) = h(nabla_Z nabla_W Y - nabla_W nabla_Z Y - nabla_[Z,W] Y, X)",
    "Ric(X,Y) = R(e_A,X,e_A,Y); Ric_J(X,Y) = R(e_A,X,Je_A,JY)",
    "<W(F),F> = 1/4 sum W_ABCD F_AB F_CD",
    "u_i = (e_i - sqrt(-1) e_{n+i})/sqrt(2); theta^i(V) = h(V, conj(u_i))",
    "K^t(X,Y,Z,W) = h(D_Z D_W Y - D_W D_Z Y - D_[Z,W] Y, X)",
    "s1 = sum K(ubar_i,u_i,u_j,ubar_j); s2 = sum K(ubar_i,u_j,u_i,ubar_j)",
    "T^i(X,Y) = theta^i(D_X Y - D_Y X - [X,Y]) for t = 1",
    "Ricci form traces: <rho, F> with the complex bilinear extension; factor 1",
)

LEDGER_HASH = hashlib.sha256("\n".join(CONVENTION_LEDGER).encode()).hexdigest()
