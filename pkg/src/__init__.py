"""
Tsallis Coherence Toolkit Package
"""
__version__ = "1.0.0"
__description__ = "Tsallis relative alpha entropy coherence measures with a randomized verification harness"
