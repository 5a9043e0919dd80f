"""Hall algebra wall-crossing and Stokes data of irregular connections."""
__version__ = "0.1.0"
