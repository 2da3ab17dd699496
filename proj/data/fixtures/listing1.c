static void dump_relocs (bfd *abfd){
    bfd_map_over_sections (abfd, dump_relocs_in_section, NULL);}

void bfd_map_over_sections (bfd *abfd, void (*func) (bfd *, asection *, void *),void *data){
  bfd_boolean more_sections;
  asection *section;
  BFD_ASSERT (abfd != NULL);
  BFD_ASSERT (func != NULL);
  for (section = abfd->sections; section != NULL; section = section->next){
    dump_relocs_in_section (abfd, section, NULL);}
}

static void dump_relocs_in_section (bfd *abfd, asection *section,void *dummy){
    arelent **relpp;
}
