"""
Geometry package.

Jets, Kähler potentials, metrics and curvature, the hyperkähler frame,
geodesics and their stability, the Kummer atlas with its isometries, and the
radial Monge-Ampère solver.
"""
import logging

logging.getLogger(__name__).debug("Package '%s' loaded.", __name__)
