from .fourier import price_european_fourier
from .lattice import LatticePricer, LatticeSpec, TransitionKernel, build_lattice, price_lattice
from .levy import LevyComponent, levy_components
from .montecarlo import price_monte_carlo
from .options import OptionSpec, PriceResult, payoff
