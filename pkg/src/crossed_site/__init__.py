"""Crossed groups over the finite sites Delta, AugDelta and Nabla."""
from .finite_site import SiteId, SiteMorphism, Site, hom_set, compose
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["SiteId", "SiteMorphism", "Site", "hom_set", "compose", "BACKEND", "__version__"]
