"""Figure rendering for stoch-euler ensemble analysis outputs."""

from .figures import PANELS, FigureSpec, render_figure
from .reader import AnalysisData, MissingInputError, load_analysis

__version__ = "0.1.0"
