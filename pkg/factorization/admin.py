from django.contrib import admin

from .models import ClassificationRun


@admin.register(ClassificationRun)
class ClassificationRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'content_hash', 'verdict', 'sheet_count', 'created_at')
    list_filter = ('verdict',)
    search_fields = ('content_hash',)
    readonly_fields = ('report', 'created_at')
