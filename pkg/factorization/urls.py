from django.urls import path
from ninja import NinjaAPI
from .api import router as factorization_router

api = NinjaAPI(
    title="Wiener-Hopf Factorization API",
    version='1.0.0',
    urls_namespace='factorization_api_v1'
)

api.add_router("/", factorization_router)  # Класифікація, діаграми, журнал запусків

urlpatterns = [
    path('api/', api.urls),
]
