from fastapi import APIRouter

router = APIRouter()

# Import and include route modules
from app.api import residue_routes

router.include_router(residue_routes.router, prefix="/residue", tags=["Residue"])
